//! Exhaustive-enumeration oracles, independent of the library's decoders.
#![allow(dead_code)]

/// Calls `f` with every assignment of `packets` packets to `levels` levels
/// (zero-based, level 0 strongest), `levels^packets` calls in total.
pub fn for_each_assignment(packets: u32, levels: u32, mut f: impl FnMut(&[u32])) {
    let mut picks = vec![0u32; packets as usize];
    loop {
        f(&picks);
        let mut i = 0;
        loop {
            if i == picks.len() {
                return;
            }
            picks[i] += 1;
            if picks[i] < levels {
                break;
            }
            picks[i] = 0;
            i += 1;
        }
    }
}

fn level_counts(picks: &[u32], levels: u32) -> Vec<u32> {
    let mut counts = vec![0; levels as usize];
    for &p in picks {
        counts[p as usize] += 1;
    }
    counts
}

/// Number of packets decoded and whether an empty level was seen, scanning
/// strongest first and stopping at the first shared level.
pub fn sic_by_hand(picks: &[u32], levels: u32) -> (u32, bool) {
    let counts = level_counts(picks, levels);
    let mut ok = 0;
    let mut idle = false;
    for c in counts {
        if c >= 2 {
            break;
        }
        if c == 0 {
            idle = true;
        } else {
            ok += 1;
        }
    }
    (ok, idle)
}

/// `P(S = s)` for `s = 0..=packets`, by enumeration.
pub fn success_distribution(packets: u32, levels: u32) -> Vec<f64> {
    let mut hist = vec![0u64; packets as usize + 1];
    let mut total = 0u64;
    for_each_assignment(packets, levels, |picks| {
        hist[sic_by_hand(picks, levels).0 as usize] += 1;
        total += 1;
    });
    hist.into_iter().map(|h| h as f64 / total as f64).collect()
}

pub fn idle_probability(packets: u32, levels: u32) -> f64 {
    let mut idle = 0u64;
    let mut total = 0u64;
    for_each_assignment(packets, levels, |picks| {
        idle += u64::from(sic_by_hand(picks, levels).1);
        total += 1;
    });
    idle as f64 / total as f64
}

/// Probability that the strongest occupied level holds exactly one packet.
pub fn physical_capture_probability(packets: u32, levels: u32) -> f64 {
    let mut hits = 0u64;
    let mut total = 0u64;
    for_each_assignment(packets, levels, |picks| {
        let top = picks.iter().min().copied();
        if let Some(top) = top {
            hits += u64::from(picks.iter().filter(|&&p| p == top).count() == 1);
        }
        total += 1;
    });
    hits as f64 / total as f64
}
