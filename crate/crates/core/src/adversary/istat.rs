/// Largest joint distribution accepted.
pub const MAX_ATOMS: usize = 1 << 20;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum IstatError {
    #[error("{0} atoms exceed the limit of {MAX_ATOMS}")]
    TooLarge(usize),
    #[error("probabilities must be non-negative and sum to 1 (sum {0})")]
    NotDistribution(f64),
    #[error("{got} probabilities for dimensions of size {expected}")]
    Shape { got: usize, expected: usize },
}

/// A joint law of `(X, Y, Z)` stored as `p[(x * ny + y) * nz + z]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Joint3 {
    pub dims: [usize; 3],
    pub probs: Vec<f64>,
}

impl Joint3 {
    pub fn new(dims: [usize; 3], probs: Vec<f64>) -> Result<Self, IstatError> {
        let expected = dims.iter().product();
        if probs.len() != expected {
            return Err(IstatError::Shape {
                got: probs.len(),
                expected,
            });
        }
        Ok(Self { dims, probs })
    }

    pub fn from_fn(dims: [usize; 3], f: impl Fn(usize, usize, usize) -> f64) -> Self {
        let mut probs = Vec::with_capacity(dims.iter().product());
        for x in 0..dims[0] {
            for y in 0..dims[1] {
                for z in 0..dims[2] {
                    probs.push(f(x, y, z));
                }
            }
        }
        Self { dims, probs }
    }

    fn at(&self, x: usize, y: usize, z: usize) -> f64 {
        self.probs[(x * self.dims[1] + y) * self.dims[2] + z]
    }
}

/// `SD(P_XYZ, P_Z P_{X|Z} P_{Y|Z})`.
pub fn istat_exact_tiny(joint: &Joint3) -> Result<f64, IstatError> {
    let [nx, ny, nz] = joint.dims;
    let atoms = nx * ny * nz;
    if atoms > MAX_ATOMS {
        return Err(IstatError::TooLarge(atoms));
    }
    let total: f64 = joint.probs.iter().sum();
    if joint.probs.iter().any(|p| *p < 0.0) || (total - 1.0).abs() > 1e-9 {
        return Err(IstatError::NotDistribution(total));
    }
    let mut p_xz = vec![0.0; nx * nz];
    let mut p_yz = vec![0.0; ny * nz];
    let mut p_z = vec![0.0; nz];
    for x in 0..nx {
        for y in 0..ny {
            for z in 0..nz {
                let p = joint.at(x, y, z);
                p_xz[x * nz + z] += p;
                p_yz[y * nz + z] += p;
                p_z[z] += p;
            }
        }
    }
    let mut sd = 0.0;
    for x in 0..nx {
        for y in 0..ny {
            for z in 0..nz {
                let surrogate = if p_z[z] > 0.0 {
                    p_xz[x * nz + z] * p_yz[y * nz + z] / p_z[z]
                } else {
                    0.0
                };
                sd += (joint.at(x, y, z) - surrogate).abs();
            }
        }
    }
    Ok(sd / 2.0)
}
