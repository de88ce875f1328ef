//! Synthetic training data and the geometry of the minimum-norm interpolant.
//!
//! Data follow `y_i = V0ᵀx_i + ε_i` with `x_i ~ N(0, I)`, `V0` uniform on the
//! unit sphere and `ε_i ~ N(0, σ_ε²)`. All randomness comes from ChaCha8
//! streams keyed by a 64-bit seed, so datasets are identical across machines.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::model::DataSummary;

/// Relative size below which a pivot of the QR factor counts as zero.
pub const RANK_TOL: f64 = 1e-10;

/// Generator for stream `stream` of `seed`.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// A training set. Columns of `x` are the inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
    pub v0: DVector<f64>,
    pub seed: u64,
    pub sigma_eps: f64,
}

impl Dataset {
    pub fn n0(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    /// Smallest over largest singular value of `x`.
    pub fn condition_ratio(&self) -> f64 {
        let s = self.x.clone().singular_values();
        let max = s.max();
        if max > 0.0 {
            s.min() / max
        } else {
            0.0
        }
    }
}

/// Draws a dataset from stream 0 of `seed`.
pub fn generate(n0: usize, p: usize, sigma_eps: f64, seed: u64) -> Result<Dataset> {
    generate_stream(n0, p, sigma_eps, seed, 0)
}

/// Draws a dataset from an explicit stream, for independent trials.
pub fn generate_stream(n0: usize, p: usize, sigma_eps: f64, seed: u64, stream: u64) -> Result<Dataset> {
    if n0 == 0 || p == 0 {
        return Err(Error::InvalidArgs("n0 and p must be positive".into()));
    }
    if !(sigma_eps >= 0.0) || !sigma_eps.is_finite() {
        return Err(Error::InvalidArgs(format!("sigma_eps must be non-negative, got {sigma_eps}")));
    }
    let mut rng = rng_for(seed, stream);
    let mut normal = || -> f64 { StandardNormal.sample(&mut rng) };
    let mut v0 = DVector::from_fn(n0, |_, _| normal());
    v0 /= v0.norm();
    let x = DMatrix::from_fn(n0, p, |_, _| normal());
    let noise = DVector::from_fn(p, |_, _| normal());
    let y = x.tr_mul(&v0) + noise * sigma_eps;
    Ok(Dataset { x, y, v0, seed, sigma_eps })
}

/// Minimum-norm (least-squares when P > N0) solution and the span of the data.
#[derive(Debug, Clone, PartialEq)]
pub struct Geometry {
    pub theta_star: DVector<f64>,
    pub theta_star_norm2: f64,
    pub rank: usize,
    /// Orthonormal basis of col(X), `n0 × rank`.
    pub basis: DMatrix<f64>,
}

impl Geometry {
    pub fn n0(&self) -> usize {
        self.theta_star.len()
    }

    pub fn summary(&self) -> Result<DataSummary<f64>> {
        DataSummary::new(self.rank, self.n0(), self.theta_star_norm2)
    }
}

fn rank_of(r: &DMatrix<f64>) -> usize {
    let n = r.nrows().min(r.ncols());
    let top = r[(0, 0)].abs();
    (0..n).take_while(|&i| r[(i, i)].abs() > RANK_TOL * top).count()
}

/// θ* = X(XᵀX)⁻¹Y via a column-pivoted QR factorization of X.
///
/// With more samples than dimensions the least-squares solution of XᵀΘ = Y
/// is returned instead, from a factorization of Xᵀ. Rank is judged from the
/// diagonal of the pivoted triangular factor.
pub fn min_norm_interpolant(data: &Dataset) -> Result<Geometry> {
    min_norm_solve(&data.x, &data.y)
}

pub fn min_norm_solve(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<Geometry> {
    let (n0, p) = x.shape();
    if y.len() != p {
        return Err(Error::DimensionMismatch { expected: p, got: y.len() });
    }
    if p <= n0 {
        let qr = x.clone().col_piv_qr();
        let (q, r, perm) = qr.unpack();
        let rank = rank_of(&r);
        if rank < p {
            return Err(Error::RankDeficient { rank, needed: p });
        }
        let mut z = y.clone();
        perm.permute_rows(&mut z);
        let w = r
            .tr_solve_upper_triangular(&z)
            .ok_or(Error::RankDeficient { rank, needed: p })?;
        let theta_star = &q * w;
        let theta_star_norm2 = theta_star.norm_squared();
        Ok(Geometry { theta_star, theta_star_norm2, rank, basis: q })
    } else {
        let qr = x.transpose().col_piv_qr();
        let (q, r, perm) = qr.unpack();
        let rank = rank_of(&r);
        if rank < n0 {
            return Err(Error::RankDeficient { rank, needed: n0 });
        }
        let mut w = r
            .solve_upper_triangular(&q.tr_mul(y))
            .ok_or(Error::RankDeficient { rank, needed: n0 })?;
        perm.inv_permute_rows(&mut w);
        let theta_star_norm2 = w.norm_squared();
        Ok(Geometry { theta_star: w, theta_star_norm2, rank, basis: DMatrix::identity(n0, n0) })
    }
}

/// Splits `x` into its projection onto col(X) and the orthogonal remainder.
pub fn decompose(x: &DVector<f64>, geometry: &Geometry) -> Result<(DVector<f64>, DVector<f64>)> {
    if x.len() != geometry.n0() {
        return Err(Error::DimensionMismatch { expected: geometry.n0(), got: x.len() });
    }
    let par = &geometry.basis * geometry.basis.tr_mul(x);
    let perp = x - &par;
    Ok((par, perp))
}

/// Σ⊥_ij = ⟨x_i⊥, x_j⊥⟩/(N0 − P).
pub fn sigma_perp(test_points: &[DVector<f64>], geometry: &Geometry) -> Result<DMatrix<f64>> {
    let n0 = geometry.n0();
    if geometry.rank >= n0 {
        return Err(Error::InvalidArgs("sigma_perp requires P < N0".into()));
    }
    let perps = test_points
        .iter()
        .map(|x| decompose(x, geometry).map(|(_, perp)| perp))
        .collect::<Result<Vec<_>>>()?;
    let scale = (n0 - geometry.rank) as f64;
    let k = perps.len();
    Ok(DMatrix::from_fn(k, k, |i, j| perps[i].dot(&perps[j]) / scale))
}

fn put_u64(w: &mut impl Write, v: u64) -> Result<()> {
    Ok(w.write_all(&v.to_le_bytes())?)
}

fn put_f64s<'a>(w: &mut impl Write, vs: impl IntoIterator<Item = &'a f64>) -> Result<()> {
    for v in vs {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn get_u64(r: &mut impl Read) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn get_f64(r: &mut impl Read) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

/// Writes `n0, p, seed` (u64) and `sigma_eps`, then X column-major, y and V0,
/// all little-endian 8-byte words.
pub fn write_dataset(path: &Path, data: &Dataset) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    put_u64(&mut w, data.n0() as u64)?;
    put_u64(&mut w, data.p() as u64)?;
    put_u64(&mut w, data.seed)?;
    put_f64s(&mut w, [data.sigma_eps].iter())?;
    put_f64s(&mut w, data.x.iter())?;
    put_f64s(&mut w, data.y.iter())?;
    put_f64s(&mut w, data.v0.iter())?;
    Ok(w.flush()?)
}

pub fn read_dataset(path: &Path) -> Result<Dataset> {
    let mut r = BufReader::new(File::open(path)?);
    let n0 = get_u64(&mut r)? as usize;
    let p = get_u64(&mut r)? as usize;
    let seed = get_u64(&mut r)?;
    let sigma_eps = get_f64(&mut r)?;
    let mut read_n = |n: usize| (0..n).map(|_| get_f64(&mut r)).collect::<Result<Vec<_>>>();
    let x = DMatrix::from_vec(n0, p, read_n(n0 * p)?);
    let y = DVector::from_vec(read_n(p)?);
    let v0 = DVector::from_vec(read_n(n0)?);
    Ok(Dataset { x, y, v0, seed, sigma_eps })
}
