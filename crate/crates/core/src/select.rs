//! Selection of the k-th smallest element under a total order.
//!
//! [`quickselect_by`] is the default. It delegates to the standard library's
//! introselect, whose pivots are chosen deterministically, so runs are
//! reproducible; it is expected linear and falls back to a linear-time
//! strategy on adversarial inputs.
//! [`median_of_medians_by`] is the textbook BFPRT algorithm, used by median
//! splits when the `median-of-medians` feature is enabled.
//!
//! Both rearrange `v` so that `v[k]` holds the element that would be there
//! after sorting, everything before it compares `<=` and everything after
//! compares `>=`.

use std::cmp::Ordering;

const INSERTION_CUTOFF: usize = 16;

fn insertion_sort_by<T, F>(v: &mut [T], cmp: &mut F)
where
    F: FnMut(&T, &T) -> Ordering,
{
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && cmp(&v[j - 1], &v[j]) == Ordering::Greater {
            v.swap(j - 1, j);
            j -= 1;
        }
    }
}

/// Three-way partition around `v[pivot]`. Returns `(lt, gt)` such that
/// `v[..lt] < pivot`, `v[lt..gt] == pivot`, `v[gt..] > pivot`.
fn partition3<T, F>(v: &mut [T], pivot: usize, cmp: &mut F) -> (usize, usize)
where
    F: FnMut(&T, &T) -> Ordering,
{
    let last = v.len() - 1;
    v.swap(pivot, last);
    let (mut lt, mut i, mut gt) = (0, 0, last);
    // Pivot sits at v[last] while [i, gt) is scanned.
    while i < gt {
        match cmp(&v[i], &v[last]) {
            Ordering::Less => {
                v.swap(lt, i);
                lt += 1;
                i += 1;
            }
            Ordering::Greater => {
                gt -= 1;
                v.swap(i, gt);
            }
            Ordering::Equal => i += 1,
        }
    }
    v.swap(gt, last);
    (lt, gt + 1)
}

pub fn quickselect_by<T, F>(v: &mut [T], k: usize, cmp: F)
where
    F: FnMut(&T, &T) -> Ordering,
{
    assert!(k < v.len(), "selection rank {k} out of range for {} items", v.len());
    v.select_nth_unstable_by(k, cmp);
}

pub fn median_of_medians_by<T, F>(v: &mut [T], k: usize, mut cmp: F)
where
    F: FnMut(&T, &T) -> Ordering,
{
    assert!(k < v.len(), "selection rank {k} out of range for {} items", v.len());
    bfprt(v, k, &mut cmp);
}

fn bfprt<T, F>(v: &mut [T], mut k: usize, cmp: &mut F)
where
    F: FnMut(&T, &T) -> Ordering,
{
    let (mut lo, mut hi) = (0, v.len());
    loop {
        let window = &mut v[lo..hi];
        let n = window.len();
        if n <= INSERTION_CUTOFF {
            insertion_sort_by(window, cmp);
            return;
        }
        // Sort groups of five and gather their medians at the front.
        let groups = n.div_ceil(5);
        for g in 0..groups {
            let start = g * 5;
            let end = (start + 5).min(n);
            insertion_sort_by(&mut window[start..end], cmp);
            window.swap(g, start + (end - start - 1) / 2);
        }
        bfprt(&mut window[..groups], groups / 2, cmp);
        let (lt, gt) = partition3(window, groups / 2, cmp);
        if k < lt {
            hi = lo + lt;
        } else if k >= gt {
            k -= gt;
            lo += gt;
        } else {
            return;
        }
    }
}
