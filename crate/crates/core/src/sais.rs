//! Suffix array construction by induced sorting (SA-IS).
//!
//! Works on integer alphabets, so it serves both the reference text and the
//! metacharacter string used for head sorting. The input must end with a
//! unique smallest symbol.

const EMPTY: usize = usize::MAX;

/// Suffix array of `text` over the alphabet `0..alphabet_size`.
///
/// `text` must be nonempty and its last symbol must be strictly smaller
/// than every other symbol.
pub fn suffix_array(text: &[u32], alphabet_size: usize) -> Vec<usize> {
    debug_assert!(text.iter().all(|&c| (c as usize) < alphabet_size));
    debug_assert!(text
        .last()
        .is_none_or(|&last| text[..text.len() - 1].iter().all(|&c| c > last)));
    sais(text, alphabet_size)
}

fn sais(s: &[u32], k: usize) -> Vec<usize> {
    let n = s.len();
    match n {
        0 => return Vec::new(),
        1 => return vec![0],
        _ => {}
    }

    // true = S-type
    let mut stype = vec![false; n];
    stype[n - 1] = true;
    for i in (0..n - 1).rev() {
        stype[i] = s[i] < s[i + 1] || (s[i] == s[i + 1] && stype[i + 1]);
    }
    let is_lms = |i: usize| i > 0 && stype[i] && !stype[i - 1];

    let mut counts = vec![0usize; k];
    for &c in s {
        counts[c as usize] += 1;
    }

    let mut sa = vec![EMPTY; n];
    let mut tails = bucket_tails(&counts);
    for (i, &c) in s.iter().enumerate().skip(1) {
        if is_lms(i) {
            let c = c as usize;
            tails[c] -= 1;
            sa[tails[c]] = i;
        }
    }
    induce(s, &stype, &counts, &mut sa);

    // Name LMS substrings in sorted order.
    let mut names = vec![EMPTY; n];
    let mut name = 0usize;
    let mut prev: Option<usize> = None;
    for &p in sa.iter() {
        if p == EMPTY || !is_lms(p) {
            continue;
        }
        if let Some(q) = prev {
            if !lms_substrings_equal(s, &stype, q, p) {
                name += 1;
            }
        }
        names[p] = name;
        prev = Some(p);
    }
    let num_names = name + 1;

    let lms_positions: Vec<usize> = (1..n).filter(|&i| is_lms(i)).collect();
    let reduced: Vec<u32> = lms_positions.iter().map(|&p| names[p] as u32).collect();
    drop(names);

    let reduced_sa = if num_names == reduced.len() {
        let mut direct = vec![0usize; reduced.len()];
        for (i, &c) in reduced.iter().enumerate() {
            direct[c as usize] = i;
        }
        direct
    } else {
        sais(&reduced, num_names)
    };

    sa.fill(EMPTY);
    let mut tails = bucket_tails(&counts);
    for &r in reduced_sa.iter().rev() {
        let p = lms_positions[r];
        let c = s[p] as usize;
        tails[c] -= 1;
        sa[tails[c]] = p;
    }
    induce(s, &stype, &counts, &mut sa);
    sa
}

fn bucket_heads(counts: &[usize]) -> Vec<usize> {
    let mut sum = 0;
    counts
        .iter()
        .map(|&c| {
            let head = sum;
            sum += c;
            head
        })
        .collect()
}

fn bucket_tails(counts: &[usize]) -> Vec<usize> {
    let mut sum = 0;
    counts
        .iter()
        .map(|&c| {
            sum += c;
            sum
        })
        .collect()
}

fn induce(s: &[u32], stype: &[bool], counts: &[usize], sa: &mut [usize]) {
    let n = s.len();
    let mut heads = bucket_heads(counts);
    for i in 0..n {
        let p = sa[i];
        if p != EMPTY && p > 0 && !stype[p - 1] {
            let c = s[p - 1] as usize;
            sa[heads[c]] = p - 1;
            heads[c] += 1;
        }
    }
    let mut tails = bucket_tails(counts);
    for i in (0..n).rev() {
        let p = sa[i];
        if p != EMPTY && p > 0 && stype[p - 1] {
            let c = s[p - 1] as usize;
            tails[c] -= 1;
            sa[tails[c]] = p - 1;
        }
    }
}

fn lms_substrings_equal(s: &[u32], stype: &[bool], a: usize, b: usize) -> bool {
    let n = s.len();
    let is_lms = |i: usize| i > 0 && stype[i] && !stype[i - 1];
    let mut d = 0;
    loop {
        if a + d >= n || b + d >= n {
            return false;
        }
        if s[a + d] != s[b + d] || stype[a + d] != stype[b + d] {
            return false;
        }
        if d > 0 {
            let (la, lb) = (is_lms(a + d), is_lms(b + d));
            if la || lb {
                return la && lb;
            }
        }
        d += 1;
    }
}
