use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `exp(-gamma * |x - z|^2)`.
pub fn gaussian_kernel<T: Scalar>(x: &[T], z: &[T], gamma: T) -> Result<T> {
    if x.len() != z.len() {
        return Err(Error::Shape {
            expected: x.len(),
            got: z.len(),
        });
    }
    Ok(rbf(x, z, gamma))
}

#[inline]
pub(crate) fn rbf<T: Scalar>(x: &[T], z: &[T], gamma: T) -> T {
    let d2: T = x.iter().zip(z).map(|(&a, &b)| (a - b) * (a - b)).sum();
    (-gamma * d2).exp()
}

/// Dense row-major Gram matrix of the rows of `x`.
pub fn gram_matrix<T: Scalar>(x: &[&[T]], gamma: T) -> Vec<T> {
    let n = x.len();
    let mut k = vec![T::zero(); n * n];
    for i in 0..n {
        k[i * n + i] = T::one();
        for j in 0..i {
            let v = rbf(x[i], x[j], gamma);
            k[i * n + j] = v;
            k[j * n + i] = v;
        }
    }
    k
}
