//! Pairwise dense contraction of rank-r tensors with bond dimension 2.

use num_complex::Complex;
use num_traits::Float;

use crate::network::Label;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor<T> {
    pub indices: Vec<Label>,
    pub data: Vec<Complex<T>>,
}

impl<T: Float> DenseTensor<T> {
    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Reorders axes so that `order` becomes the index list.
    pub fn permuted(&self, order: &[Label]) -> DenseTensor<T> {
        if order == self.indices.as_slice() {
            return self.clone();
        }
        let r = self.indices.len();
        assert_eq!(order.len(), r, "permutation must keep every index");
        let src_stride: Vec<usize> = order
            .iter()
            .map(|l| {
                let p = self.indices.iter().position(|x| x == l).expect("label present");
                1usize << (r - 1 - p)
            })
            .collect();
        DenseTensor { indices: order.to_vec(), data: gather(&self.data, &src_stride) }
    }
}

/// `out[j] = data[Σ_p bit_p(j) · stride[p]]`, with bit 0 of `j` the last axis.
fn gather<T: Copy>(data: &[T], stride: &[usize]) -> Vec<T> {
    let r = stride.len();
    let mut out = Vec::with_capacity(1 << r);
    let mut offset = 0usize;
    for j in 0..1usize << r {
        out.push(data[offset]);
        // Binary carry from the last axis: trailing ones clear, next zero sets.
        let mut p = r;
        while p > 0 {
            p -= 1;
            let s = stride[p];
            if (j >> (r - 1 - p)) & 1 == 1 {
                offset -= s;
            } else {
                offset += s;
                break;
            }
        }
    }
    out
}

/// Contracts all shared indices of `a` and `b`; the result carries
/// `a`'s free indices followed by `b`'s. Returns the number of complex
/// multiply-adds performed.
pub fn contract_pair<T: Float>(a: &DenseTensor<T>, b: &DenseTensor<T>) -> (DenseTensor<T>, u64) {
    let shared: Vec<Label> = a.indices.iter().copied().filter(|l| b.indices.contains(l)).collect();
    let free_a: Vec<Label> = a.indices.iter().copied().filter(|l| !shared.contains(l)).collect();
    let free_b: Vec<Label> = b.indices.iter().copied().filter(|l| !shared.contains(l)).collect();

    let a_order: Vec<Label> = free_a.iter().chain(&shared).copied().collect();
    let b_order: Vec<Label> = shared.iter().chain(&free_b).copied().collect();
    let ap = a.permuted(&a_order);
    let bp = b.permuted(&b_order);

    let rows = 1usize << free_a.len();
    let inner = 1usize << shared.len();
    let cols = 1usize << free_b.len();
    let zero = Complex::new(T::zero(), T::zero());
    let mut out = vec![zero; rows * cols];
    for i in 0..rows {
        let arow = &ap.data[i * inner..(i + 1) * inner];
        let crow = &mut out[i * cols..(i + 1) * cols];
        for (s, &av) in arow.iter().enumerate() {
            let brow = &bp.data[s * cols..(s + 1) * cols];
            for (c, &bv) in crow.iter_mut().zip(brow) {
                *c = *c + av * bv;
            }
        }
    }
    let indices = free_a.into_iter().chain(free_b).collect();
    (DenseTensor { indices, data: out }, (rows * inner * cols) as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(labels: &[u32], vals: &[f64]) -> DenseTensor<f64> {
        DenseTensor {
            indices: labels.iter().map(|&l| Label(l)).collect(),
            data: vals.iter().map(|&v| Complex::new(v, 0.0)).collect(),
        }
    }

    #[test]
    fn matrix_product() {
        // [[1,2],[3,4]] · [[5,6],[7,8]] = [[19,22],[43,50]]
        let (c, macs) = contract_pair(&t(&[0, 1], &[1., 2., 3., 4.]), &t(&[1, 2], &[5., 6., 7., 8.]));
        assert_eq!(macs, 8);
        assert_eq!(c.indices, vec![Label(0), Label(2)]);
        let re: Vec<f64> = c.data.iter().map(|z| z.re).collect();
        assert_eq!(re, vec![19., 22., 43., 50.]);
    }

    #[test]
    fn transposed_contraction_and_outer_product() {
        // Contract over the first index of B: Σ_j A[i,j] B[j,k] with B stored as [k, j].
        let (c, _) = contract_pair(&t(&[0, 1], &[1., 2., 3., 4.]), &t(&[2, 1], &[5., 7., 6., 8.]));
        let re: Vec<f64> = c.data.iter().map(|z| z.re).collect();
        assert_eq!(re, vec![19., 22., 43., 50.]);
        let (o, macs) = contract_pair(&t(&[0], &[1., 2.]), &t(&[1], &[3., 4.]));
        assert_eq!(macs, 4);
        let re: Vec<f64> = o.data.iter().map(|z| z.re).collect();
        assert_eq!(re, vec![3., 4., 6., 8.]);
    }

    #[test]
    fn permutation_matches_naive_gather() {
        let vals: Vec<f64> = (0..16).map(f64::from).collect();
        let a = t(&[0, 1, 2, 3], &vals);
        let order = [Label(2), Label(0), Label(3), Label(1)];
        let p = a.permuted(&order);
        for j in 0..16usize {
            let bit = |pos: usize| (j >> (3 - pos)) & 1;
            // new position -> old position: 2->0, 0->1, 3->2, 1->3
            let src = bit(1) << 3 | bit(3) << 2 | bit(0) << 1 | bit(2);
            assert_eq!(p.data[j].re, src as f64);
        }
    }
}
