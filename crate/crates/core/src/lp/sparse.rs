use super::Scalar;

/// Sparse vector with entries sorted by column.
pub(crate) type SparseRow<T> = Vec<(usize, T)>;

pub(crate) fn get<T>(row: &[(usize, T)], col: usize) -> Option<&T> {
    row.binary_search_by_key(&col, |(c, _)| *c)
        .ok()
        .map(|i| &row[i].1)
}

/// `a - factor * b`, dropping entries that vanish.
pub(crate) fn axpy<T: Scalar>(a: &[(usize, T)], factor: &T, b: &[(usize, T)]) -> SparseRow<T> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let ca = a.get(i).map_or(usize::MAX, |e| e.0);
        let cb = b.get(j).map_or(usize::MAX, |e| e.0);
        if ca < cb {
            out.push(a[i].clone());
            i += 1;
        } else if cb < ca {
            let v = factor.mul(&b[j].1).neg();
            if !v.is_zero() {
                out.push((cb, v));
            }
            j += 1;
        } else {
            let v = a[i].1.sub_mul(factor, &b[j].1);
            if !v.is_zero() {
                out.push((ca, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

pub(crate) fn scale<T: Scalar>(row: &mut [(usize, T)], divisor: &T) {
    for (_, v) in row.iter_mut() {
        *v = v.div(divisor);
    }
}
