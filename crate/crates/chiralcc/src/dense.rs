//! Dense matrix forms of generalized Paulis for small systems.
//!
//! This is the independent reference backend the algebra is validated
//! against. X|j⟩ = |j+1 mod d⟩ and Z|j⟩ = ω^j |j⟩, so ZX = ωXZ.

use num_complex::Complex64;

use crate::pauli::PauliOperator;

#[derive(Clone, Debug)]
pub struct DenseMatrix {
    pub dim: usize,
    pub data: Vec<Complex64>, // row-major
}

impl DenseMatrix {
    pub fn zeros(dim: usize) -> Self {
        DenseMatrix {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.dim + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.data[r * self.dim + c] = v;
    }

    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut out = DenseMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> DenseMatrix {
        DenseMatrix {
            dim: self.dim,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn approx_eq(&self, other: &DenseMatrix, tol: f64) -> bool {
        self.dim == other.dim
            && self
                .data
                .iter()
                .zip(&other.data)
                .all(|(a, b)| (a - b).norm() <= tol)
    }
}

fn omega(d: u32, k: i64) -> Complex64 {
    let theta = 2.0 * std::f64::consts::PI * k as f64 / d as f64;
    Complex64::new(theta.cos(), theta.sin())
}

/// Single-qudit X^a Z^b as a d×d matrix: (X^a Z^b)|j⟩ = ω^{bj} |j+a⟩.
fn single_site(d: u32, a: u8, b: u8) -> DenseMatrix {
    let dd = d as usize;
    let mut m = DenseMatrix::zeros(dd);
    for j in 0..dd {
        let target = (j + a as usize) % dd;
        m.set(target, j, omega(d, b as i64 * j as i64));
    }
    m
}

fn kron(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    let n = a.dim * b.dim;
    let mut out = DenseMatrix::zeros(n);
    for i1 in 0..a.dim {
        for j1 in 0..a.dim {
            let v1 = a.get(i1, j1);
            if v1.norm_sqr() == 0.0 {
                continue;
            }
            for i2 in 0..b.dim {
                for j2 in 0..b.dim {
                    out.set(
                        i1 * b.dim + i2,
                        j1 * b.dim + j2,
                        v1 * b.get(i2, j2),
                    );
                }
            }
        }
    }
    out
}

/// Full d^n × d^n matrix of a canonical-form operator, including its phase.
pub fn to_matrix(op: &PauliOperator) -> DenseMatrix {
    let d = op.d();
    let n = op.sites();
    assert!(
        (d as usize).pow(n as u32) <= 4096,
        "dense oracle is for small systems only"
    );
    let mut m = DenseMatrix::identity(1);
    for i in 0..n {
        m = kron(&m, &single_site(d, op.x_exponent(i), op.z_exponent(i)));
    }
    m.scale(op.phase().to_complex())
}
