use super::{GeneralMatrix, HermitianMatrix};

/// `[[0, B], [B*, 0]]`, of dimension `rows + cols`.
pub fn hermitian_dilation(b: &GeneralMatrix) -> HermitianMatrix {
    let (r, c) = (b.rows(), b.cols());
    let n = r + c;
    let mut m = GeneralMatrix::zeros(n, n);
    for i in 0..r {
        for j in 0..c {
            let z = b.get(i, j);
            m.set(i, r + j, z);
            m.set(r + j, i, z.conj());
        }
    }
    HermitianMatrix::hermitian_part(&m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::eig_hermitian;

    #[test]
    fn scalar_dilation() {
        let d = hermitian_dilation(&GeneralMatrix::from_real(1, 1, &[3.0]).unwrap());
        assert_eq!(d, HermitianMatrix::from_real(2, &[0.0, 3.0, 3.0, 0.0]).unwrap());
        assert!((eig_hermitian(&d).unwrap().lambda_max() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn row_vector_dilation() {
        let d = hermitian_dilation(&GeneralMatrix::from_real(1, 2, &[1.0, 0.0]).unwrap());
        assert_eq!(d.dim(), 3);
        assert!((eig_hermitian(&d).unwrap().lambda_max() - 1.0).abs() < 1e-15);
    }
}
