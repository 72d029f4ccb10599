//! Seeded synthetic dataset generators. Every generator is a pure function
//! of its spec, so benchmarks and tests reproduce exactly from a seed.

use crate::data::Dataset;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

/// One standard normal draw via Box-Muller. `1 - u` keeps the log argument
/// inside (0, 1].
pub fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = rng.gen();
    let u2: f64 = rng.gen();
    (-2.0 * (1.0 - u1).ln()).sqrt() * (TAU * u2).cos()
}

/// One unit-rate exponential draw by inverse transform.
pub fn standard_exponential<R: Rng>(rng: &mut R) -> f64 {
    let u: f64 = rng.gen();
    -(1.0 - u).ln()
}

/// Per-class Gaussian clusters: class `c` centers every attribute at
/// `c * separation` with unit noise.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMixtureSpec {
    pub rows: usize,
    pub attrs: usize,
    pub classes: usize,
    pub separation: f64,
    pub seed: u64,
}

impl Default for GaussianMixtureSpec {
    fn default() -> Self {
        GaussianMixtureSpec { rows: 300, attrs: 4, classes: 3, separation: 2.0, seed: 0 }
    }
}

pub fn gaussian_mixture(spec: &GaussianMixtureSpec) -> Dataset {
    assert!(spec.classes >= 2, "a classification dataset needs two classes");
    assert!(spec.rows >= spec.classes && spec.attrs >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut columns = vec![Vec::with_capacity(spec.rows); spec.attrs];
    let mut labels = Vec::with_capacity(spec.rows);
    for i in 0..spec.rows {
        let class = i % spec.classes;
        let center = spec.separation * class as f64;
        for column in columns.iter_mut() {
            column.push(center + standard_normal(&mut rng));
        }
        labels.push(class as u32);
    }
    finish(columns, labels, spec.classes)
}

/// A strongly right-skewed family: attribute `x0` is unit-exponential and
/// carries the signal through a class boundary placed below its mean, the
/// remaining attributes are pure Gaussian noise, and each label flips with
/// probability `label_noise`.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewedFamilySpec {
    pub rows: usize,
    pub noise_attrs: usize,
    pub boundary: f64,
    pub label_noise: f64,
    pub seed: u64,
}

impl Default for SkewedFamilySpec {
    fn default() -> Self {
        SkewedFamilySpec { rows: 2_000, noise_attrs: 3, boundary: 0.5, label_noise: 0.1, seed: 0 }
    }
}

pub fn skewed_family(spec: &SkewedFamilySpec) -> Dataset {
    assert!(spec.rows >= 2 && (0.0..1.0).contains(&spec.label_noise));
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut columns = vec![Vec::with_capacity(spec.rows); 1 + spec.noise_attrs];
    let mut labels = Vec::with_capacity(spec.rows);
    for _ in 0..spec.rows {
        let signal = standard_exponential(&mut rng);
        columns[0].push(signal);
        for column in columns[1..].iter_mut() {
            column.push(standard_normal(&mut rng));
        }
        let mut class = u32::from(signal >= spec.boundary);
        if rng.gen::<f64>() < spec.label_noise {
            class = 1 - class;
        }
        labels.push(class);
    }
    finish(columns, labels, 2)
}

fn finish(columns: Vec<Vec<f64>>, labels: Vec<u32>, classes: usize) -> Dataset {
    let names: Vec<String> = (0..columns.len()).map(|a| format!("x{a}")).collect();
    let name_refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let class_names: Vec<String> = (0..classes).map(|c| format!("c{c}")).collect();
    let class_refs: Vec<&str> = class_names.iter().map(String::as_str).collect();
    Dataset::from_continuous(&name_refs, columns, labels, &class_refs)
        .expect("generated data is always well formed")
}
