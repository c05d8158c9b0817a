#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Dirichlet, Distribution};

use smc_core::epidemics::EpidemicModel;
use smc_core::linalg::{
    char_poly, companion_pair, controllability_matrix, inverse, solve, Matrix, Poly,
};
use smc_core::sim::Trajectory;
use smc_core::synthesis::{check_feasibility, GainIntervals, Plant};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> Matrix<f64> {
    Matrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0))
}

pub fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// Two disjoint gain intervals with random widths and gap, somewhere in `[-4, 6]`.
pub fn random_intervals(rng: &mut ChaCha8Rng) -> GainIntervals<f64> {
    let top1 = rng.gen_range(-3.0..3.0);
    let w1 = rng.gen_range(0.1..1.0);
    let gap = rng.gen_range(0.2..2.0);
    let w2 = rng.gen_range(0.1..1.0);
    GainIntervals::new(top1 - w1, top1, top1 + gap, top1 + gap + w2).unwrap()
}

/// `(s + 1)^(n - 1)`.
pub fn unit_delta(n: usize) -> Poly<f64> {
    let mut p = Poly::new(vec![1.0]);
    for _ in 1..n {
        p = p.mul(&Poly::new(vec![1.0, 1.0]));
    }
    p
}

/// Rejection-samples a controllable plant of size 2 or 3 with a sign change
/// of `det(F + gH gamma)` across the gap.
pub fn random_feasible_plant(rng: &mut ChaCha8Rng) -> (Plant<f64>, GainIntervals<f64>) {
    loop {
        let n = rng.gen_range(2..=3);
        let plant = Plant::new(random_matrix(rng, n), random_vec(rng, n), random_vec(rng, n))
            .unwrap();
        let gains = random_intervals(rng);
        if check_feasibility(&plant, &gains).feasible {
            return (plant, gains);
        }
    }
}

/// Controllable plant whose determinant keeps one sign across the gap
/// (strictly, so the affine root sits in `I1`, in `I2` or outside both).
pub fn random_det_violation(rng: &mut ChaCha8Rng) -> (Plant<f64>, GainIntervals<f64>) {
    loop {
        let n = rng.gen_range(2..=3);
        let plant = Plant::new(random_matrix(rng, n), random_vec(rng, n), random_vec(rng, n))
            .unwrap();
        let gains = random_intervals(rng);
        let r = check_feasibility(&plant, &gains);
        if r.controllable && r.det_product > 0.0 {
            return (plant, gains);
        }
    }
}

/// Uncontrollable plant with a sign change across the gap: `F = T B T^-1`
/// with `B` block upper triangular and `g = T e1`, so `g` lives in an
/// invariant subspace of dimension `n - 1`.
pub fn random_uncontrollable(rng: &mut ChaCha8Rng) -> (Plant<f64>, GainIntervals<f64>) {
    loop {
        let n = rng.gen_range(2..=3);
        let mut block = random_matrix(rng, n);
        for j in 0..n - 1 {
            block[(n - 1, j)] = 0.0;
        }
        let t = random_matrix(rng, n);
        let Ok(t_inv) = inverse(&t) else { continue };
        let f = t.matmul(&block).unwrap().matmul(&t_inv).unwrap();
        let g = t.column(0);
        let plant = Plant::new(f, g, random_vec(rng, n)).unwrap();
        let gains = random_intervals(rng);
        let r = check_feasibility(&plant, &gains);
        if !r.controllable && r.det_product < 0.0 {
            return (plant, gains);
        }
    }
}

/// `K` from `K R = K_c R_c` in the Tikhonov-regularized least-squares sense,
/// `K = K_c R_c R^T (R R^T + rho I)^-1`. Equals the exact construction when
/// `R` is invertible and stays defined when it is not.
pub fn regularized_k(plant: &Plant<f64>, delta: &Poly<f64>) -> Vec<f64> {
    let n = plant.dim();
    let r = controllability_matrix(&plant.f, &plant.g).unwrap();
    let (fc, gc) = companion_pair(&char_poly(&plant.f).unwrap()).unwrap();
    let rc = controllability_matrix(&fc, &gc).unwrap();
    let kc: Vec<f64> = (0..n).map(|i| -delta.coeff(i)).collect();
    let target = rc.vec_mul(&kc).unwrap();
    let rrt = r.matmul(&r.transpose()).unwrap();
    let rho = 1e-10 * rrt.max_abs();
    let reg = rrt.add(&Matrix::identity(n).scale(rho)).unwrap();
    // K reg = target R^T, reg symmetric.
    solve(&reg, &r.mul_vec(&target).unwrap()).unwrap()
}

/// Dirichlet(1, ..., 1) point on the probability simplex.
pub fn simplex_point(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    Dirichlet::new(&vec![1.0; n]).unwrap().sample(rng)
}

/// Largest deviation of the compartment sum from one and most negative
/// compartment over every recorded sample.
#[derive(Debug, Clone, Copy)]
pub struct Conservation {
    pub runs: usize,
    pub samples: usize,
    pub max_sum_err: f64,
    pub min_entry: f64,
    pub incomplete: usize,
}

impl Default for Conservation {
    fn default() -> Self {
        Self { runs: 0, samples: 0, max_sum_err: 0.0, min_entry: f64::INFINITY, incomplete: 0 }
    }
}

impl Conservation {
    pub fn record(&mut self, traj: &Trajectory<f64>) {
        self.runs += 1;
        if traj.termination() != smc_core::sim::Termination::Completed {
            self.incomplete += 1;
        }
        for x in traj.states() {
            self.samples += 1;
            let s: f64 = x.iter().sum();
            self.max_sum_err = self.max_sum_err.max((s - 1.0).abs());
            for &v in x {
                self.min_entry = self.min_entry.min(v);
            }
        }
    }

    pub fn holds(&self) -> bool {
        self.incomplete == 0 && self.max_sum_err <= 1e-9 && self.min_entry >= -1e-9
    }
}

pub fn seir(beta_lock: f64, beta_free: f64) -> EpidemicModel<f64> {
    EpidemicModel::Seir(smc_core::epidemics::SeirParams {
        beta_lock,
        beta_free,
        delta: 0.2,
        epsilon: 0.2,
    })
}

pub fn sair() -> EpidemicModel<f64> {
    EpidemicModel::Sair(smc_core::epidemics::SairParams {
        beta_lock: 0.1,
        beta_free: 0.8,
        delta: 0.2,
        eps1: 0.1,
        eps2: 0.1,
    })
}
