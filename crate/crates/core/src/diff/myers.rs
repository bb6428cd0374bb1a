//! Shortest edit scripts with Myers' O(ND) algorithm, linear-space variant:
//! bisect on the middle snake and recurse on both halves.

use alloc::vec;
use alloc::vec::Vec;

/// Run of edits. Scripts are coalesced: no two adjacent runs share a kind,
/// and within a hunk between two `Equal` runs, `Delete` precedes `Insert`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Edit {
    Equal(usize),
    Delete(usize),
    Insert(usize),
}

/// Minimal insert/delete script turning `a` into `b`.
pub fn edit_script<T: Eq>(a: &[T], b: &[T]) -> Vec<Edit> {
    let mut raw = Vec::new();
    diff(a, b, &mut raw);
    normalize(&raw)
}

fn push(out: &mut Vec<Edit>, e: Edit) {
    let n = match e {
        Edit::Equal(n) | Edit::Delete(n) | Edit::Insert(n) => n,
    };
    if n == 0 {
        return;
    }
    match (out.last_mut(), e) {
        (Some(Edit::Equal(m)), Edit::Equal(n))
        | (Some(Edit::Delete(m)), Edit::Delete(n))
        | (Some(Edit::Insert(m)), Edit::Insert(n)) => *m += n,
        _ => out.push(e),
    }
}

fn normalize(raw: &[Edit]) -> Vec<Edit> {
    let mut out = Vec::with_capacity(raw.len());
    let (mut del, mut ins) = (0, 0);
    for e in raw {
        match *e {
            Edit::Delete(n) => del += n,
            Edit::Insert(n) => ins += n,
            Edit::Equal(n) => {
                push(&mut out, Edit::Delete(del));
                push(&mut out, Edit::Insert(ins));
                (del, ins) = (0, 0);
                push(&mut out, Edit::Equal(n));
            }
        }
    }
    push(&mut out, Edit::Delete(del));
    push(&mut out, Edit::Insert(ins));
    out
}

fn diff<T: Eq>(a: &[T], b: &[T], out: &mut Vec<Edit>) {
    let prefix = a.iter().zip(b).take_while(|(x, y)| x == y).count();
    push(out, Edit::Equal(prefix));
    let (a, b) = (&a[prefix..], &b[prefix..]);
    let suffix = a
        .iter()
        .rev()
        .zip(b.iter().rev())
        .take_while(|(x, y)| x == y)
        .count();
    let (a, b) = (&a[..a.len() - suffix], &b[..b.len() - suffix]);
    if a.is_empty() || b.is_empty() {
        push(out, Edit::Delete(a.len()));
        push(out, Edit::Insert(b.len()));
    } else {
        match bisect(a, b) {
            Some((x, y)) => {
                diff(&a[..x], &b[..y], out);
                diff(&a[x..], &b[y..], out);
            }
            None => {
                push(out, Edit::Delete(a.len()));
                push(out, Edit::Insert(b.len()));
            }
        }
    }
    push(out, Edit::Equal(suffix));
}

/// Split point on an optimal path, found where the forward and reverse
/// searches overlap. Inputs are non-empty and differ at both ends.
fn bisect<T: Eq>(a: &[T], b: &[T]) -> Option<(usize, usize)> {
    let (n, m) = (a.len() as isize, b.len() as isize);
    let max_d = (n + m + 1) / 2;
    let offset = max_d;
    let len = 2 * max_d + 2;
    let mut v1 = vec![-1isize; len as usize];
    let mut v2 = vec![-1isize; len as usize];
    v1[(offset + 1) as usize] = 0;
    v2[(offset + 1) as usize] = 0;
    let delta = n - m;
    let front = delta % 2 != 0;
    let (mut k1start, mut k1end, mut k2start, mut k2end) = (0, 0, 0, 0);
    for d in 0..max_d {
        // Scanning diagonals from the deletion side first makes the split
        // favour scripts that delete early.
        let mut k1 = d - k1end;
        while k1 >= -d + k1start {
            let i = (offset + k1) as usize;
            let mut x1 = if k1 == -d || (k1 != d && v1[i - 1] < v1[i + 1]) {
                v1[i + 1]
            } else {
                v1[i - 1] + 1
            };
            let mut y1 = x1 - k1;
            while x1 < n && y1 < m && a[x1 as usize] == b[y1 as usize] {
                x1 += 1;
                y1 += 1;
            }
            v1[i] = x1;
            if x1 > n {
                k1end += 2;
            } else if y1 > m {
                k1start += 2;
            } else if front {
                let j = offset + delta - k1;
                if j >= 0 && j < len && v2[j as usize] != -1 && x1 >= n - v2[j as usize] {
                    return Some((x1 as usize, y1 as usize));
                }
            }
            k1 -= 2;
        }
        let mut k2 = d - k2end;
        while k2 >= -d + k2start {
            let i = (offset + k2) as usize;
            let mut x2 = if k2 == -d || (k2 != d && v2[i - 1] < v2[i + 1]) {
                v2[i + 1]
            } else {
                v2[i - 1] + 1
            };
            let mut y2 = x2 - k2;
            while x2 < n && y2 < m && a[(n - x2 - 1) as usize] == b[(m - y2 - 1) as usize] {
                x2 += 1;
                y2 += 1;
            }
            v2[i] = x2;
            if x2 > n {
                k2end += 2;
            } else if y2 > m {
                k2start += 2;
            } else if !front {
                let j = offset + delta - k2;
                if j >= 0 && j < len && v1[j as usize] != -1 {
                    let x1 = v1[j as usize];
                    let y1 = offset + x1 - j;
                    if x1 >= n - x2 {
                        return Some((x1 as usize, y1 as usize));
                    }
                }
            }
            k2 -= 2;
        }
    }
    None
}
