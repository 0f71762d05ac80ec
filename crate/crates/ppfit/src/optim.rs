//! First-order optimizers and the full-batch training loop.
//!
//! Ten classic update rules share one interface: given the gradient of
//! the loss at the current coefficients, produce the next coefficients.
//! The loop evaluates the loss every epoch, tracks the best state seen,
//! optionally stops early after a run of non-improving epochs, and
//! always returns the best coefficients rather than the last ones.
//!
//! Hyperparameter defaults follow the values these algorithms are
//! usually shipped with (β1 = 0.9, β2 = 0.999, ε = 1e-7, momentum 0.9,
//! Adadelta ρ = 0.95, accumulator start 0.1); the learning rate is
//! always explicit.

use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::basis::Basis;
use crate::error::{Error, Result};
use crate::loss::{grad_total, losses, LossConfig, SampleSet};
use crate::lsq::fit_segmentwise;
use crate::piecewise::PiecewisePolynomial;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Sgd,
    Momentum,
    Nesterov,
    Adagrad,
    Adadelta,
    Adam,
    Adamax,
    Nadam,
    Amsgrad,
    Ftrl,
}

impl OptimizerKind {
    pub const ALL: [OptimizerKind; 10] = [
        OptimizerKind::Sgd,
        OptimizerKind::Momentum,
        OptimizerKind::Nesterov,
        OptimizerKind::Adagrad,
        OptimizerKind::Adadelta,
        OptimizerKind::Adam,
        OptimizerKind::Adamax,
        OptimizerKind::Nadam,
        OptimizerKind::Amsgrad,
        OptimizerKind::Ftrl,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OptimizerKind::Sgd => "sgd",
            OptimizerKind::Momentum => "momentum",
            OptimizerKind::Nesterov => "nesterov",
            OptimizerKind::Adagrad => "adagrad",
            OptimizerKind::Adadelta => "adadelta",
            OptimizerKind::Adam => "adam",
            OptimizerKind::Adamax => "adamax",
            OptimizerKind::Nadam => "nadam",
            OptimizerKind::Amsgrad => "amsgrad",
            OptimizerKind::Ftrl => "ftrl",
        }
    }
}

impl std::str::FromStr for OptimizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        OptimizerKind::ALL
            .iter()
            .copied()
            .find(|k| k.name() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::invalid(format!("unknown optimizer '{s}'")))
    }
}

impl std::fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Shared hyperparameter pool; each optimizer reads the fields it uses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Hyperparams {
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub momentum: f64,
    /// Adadelta decay rate.
    pub rho: f64,
    /// Starting value of the Adagrad / FTRL gradient-square accumulator.
    pub accumulator_init: f64,
    /// FTRL L1 regularization strength.
    pub l1: f64,
    /// FTRL L2 regularization strength.
    pub l2: f64,
    /// FTRL learning-rate power (-0.5 gives the usual 1/√accum decay).
    pub lr_power: f64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-7,
            momentum: 0.9,
            rho: 0.95,
            accumulator_init: 0.1,
            l1: 0.0,
            l2: 0.0,
            lr_power: -0.5,
        }
    }
}

/// Per-parameter auxiliary state; allocated on the first step once the
/// parameter count is known.
#[derive(Debug, Clone)]
enum Slots {
    Unallocated,
    Stateless,
    Velocity(Vec<f64>),
    Accumulator(Vec<f64>),
    /// Adadelta: decayed squares of gradients and of updates.
    SquareAverages { grad: Vec<f64>, update: Vec<f64> },
    /// Adam family: first and second moment (Adamax keeps the infinity
    /// norm in `second`).
    Moments { first: Vec<f64>, second: Vec<f64> },
    /// Amsgrad: moments plus the running max of the corrected second
    /// moment.
    MomentsMax { first: Vec<f64>, second: Vec<f64>, second_max: Vec<f64> },
    FtrlState { accum: Vec<f64>, linear: Vec<f64> },
}

/// One optimizer instance: kind, hyperparameters and mutable state.
#[derive(Debug, Clone)]
pub struct Optimizer {
    kind: OptimizerKind,
    lr: f64,
    hp: Hyperparams,
    step_count: u64,
    slots: Slots,
}

impl Optimizer {
    pub fn new(kind: OptimizerKind, lr: f64) -> Result<Self> {
        Optimizer::with_hyperparams(kind, lr, Hyperparams::default())
    }

    pub fn with_hyperparams(kind: OptimizerKind, lr: f64, hp: Hyperparams) -> Result<Self> {
        if !(lr > 0.0) || !lr.is_finite() {
            return Err(Error::invalid(format!("learning rate must be positive, got {lr}")));
        }
        Ok(Optimizer {
            kind,
            lr,
            hp,
            step_count: 0,
            slots: Slots::Unallocated,
        })
    }

    pub fn kind(&self) -> OptimizerKind {
        self.kind
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    fn allocate(&mut self, n: usize) {
        self.slots = match self.kind {
            OptimizerKind::Sgd => Slots::Stateless,
            OptimizerKind::Momentum | OptimizerKind::Nesterov => Slots::Velocity(vec![0.0; n]),
            OptimizerKind::Adagrad => Slots::Accumulator(vec![self.hp.accumulator_init; n]),
            OptimizerKind::Adadelta => Slots::SquareAverages {
                grad: vec![0.0; n],
                update: vec![0.0; n],
            },
            OptimizerKind::Adam | OptimizerKind::Adamax | OptimizerKind::Nadam => Slots::Moments {
                first: vec![0.0; n],
                second: vec![0.0; n],
            },
            OptimizerKind::Amsgrad => Slots::MomentsMax {
                first: vec![0.0; n],
                second: vec![0.0; n],
                second_max: vec![0.0; n],
            },
            OptimizerKind::Ftrl => Slots::FtrlState {
                accum: vec![self.hp.accumulator_init; n],
                linear: vec![0.0; n],
            },
        };
    }

    fn check_shape(&self, n: usize) -> Result<()> {
        let stored = match &self.slots {
            Slots::Unallocated | Slots::Stateless => return Ok(()),
            Slots::Velocity(v) | Slots::Accumulator(v) => v.len(),
            Slots::SquareAverages { grad, .. } => grad.len(),
            Slots::Moments { first, .. } => first.len(),
            Slots::MomentsMax { first, .. } => first.len(),
            Slots::FtrlState { accum, .. } => accum.len(),
        };
        if stored != n {
            return Err(Error::invalid(format!(
                "parameter count changed from {stored} to {n} mid-run"
            )));
        }
        Ok(())
    }

    /// Apply one update in place. Deterministic; increments the step
    /// counter by exactly one.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()> {
        if params.len() != grads.len() {
            return Err(Error::invalid(format!(
                "{} parameters but {} gradient entries",
                params.len(),
                grads.len()
            )));
        }
        self.check_shape(params.len())?;
        if matches!(self.slots, Slots::Unallocated) {
            self.allocate(params.len());
        }
        self.step_count += 1;
        let t = self.step_count as i32;
        let lr = self.lr;
        let hp = self.hp;

        match (&mut self.slots, self.kind) {
            (Slots::Stateless, OptimizerKind::Sgd) => {
                for (p, &g) in params.iter_mut().zip(grads) {
                    *p -= lr * g;
                }
            }
            (Slots::Velocity(vel), OptimizerKind::Momentum) => {
                for ((p, v), &g) in params.iter_mut().zip(vel).zip(grads) {
                    *v = hp.momentum * *v - lr * g;
                    *p += *v;
                }
            }
            (Slots::Velocity(vel), OptimizerKind::Nesterov) => {
                // Look-ahead form: the parameter jumps by the new
                // velocity plus one more momentum-discounted step.
                for ((p, v), &g) in params.iter_mut().zip(vel).zip(grads) {
                    *v = hp.momentum * *v - lr * g;
                    *p += hp.momentum * *v - lr * g;
                }
            }
            (Slots::Accumulator(acc), OptimizerKind::Adagrad) => {
                for ((p, a), &g) in params.iter_mut().zip(acc).zip(grads) {
                    *a += g * g;
                    *p -= lr * g / (*a + hp.epsilon).sqrt();
                }
            }
            (Slots::SquareAverages { grad, update }, OptimizerKind::Adadelta) => {
                for (((p, eg), eu), &g) in params.iter_mut().zip(grad).zip(update).zip(grads) {
                    *eg = hp.rho * *eg + (1.0 - hp.rho) * g * g;
                    let delta = -((*eu + hp.epsilon).sqrt() / (*eg + hp.epsilon).sqrt()) * g;
                    *eu = hp.rho * *eu + (1.0 - hp.rho) * delta * delta;
                    *p += lr * delta;
                }
            }
            (Slots::Moments { first, second }, OptimizerKind::Adam) => {
                let bc1 = 1.0 - hp.beta1.powi(t);
                let bc2 = 1.0 - hp.beta2.powi(t);
                for (((p, m), v), &g) in params.iter_mut().zip(first).zip(second).zip(grads) {
                    *m = hp.beta1 * *m + (1.0 - hp.beta1) * g;
                    *v = hp.beta2 * *v + (1.0 - hp.beta2) * g * g;
                    let mhat = *m / bc1;
                    let vhat = *v / bc2;
                    *p -= lr * mhat / (vhat.sqrt() + hp.epsilon);
                }
            }
            (Slots::Moments { first, second }, OptimizerKind::Adamax) => {
                let bc1 = 1.0 - hp.beta1.powi(t);
                for (((p, m), u), &g) in params.iter_mut().zip(first).zip(second).zip(grads) {
                    *m = hp.beta1 * *m + (1.0 - hp.beta1) * g;
                    *u = (hp.beta2 * *u).max(g.abs());
                    *p -= lr * *m / (bc1 * (*u + hp.epsilon));
                }
            }
            (Slots::Moments { first, second }, OptimizerKind::Nadam) => {
                // Plain Nesterov-Adam without the momentum-decay
                // schedule: the bias-corrected first moment is blended
                // with the current gradient before the Adam step.
                let bc1 = 1.0 - hp.beta1.powi(t);
                let bc2 = 1.0 - hp.beta2.powi(t);
                for (((p, m), v), &g) in params.iter_mut().zip(first).zip(second).zip(grads) {
                    *m = hp.beta1 * *m + (1.0 - hp.beta1) * g;
                    *v = hp.beta2 * *v + (1.0 - hp.beta2) * g * g;
                    let mhat = hp.beta1 * (*m / bc1) + (1.0 - hp.beta1) * g / bc1;
                    let vhat = *v / bc2;
                    *p -= lr * mhat / (vhat.sqrt() + hp.epsilon);
                }
            }
            (Slots::MomentsMax { first, second, second_max }, OptimizerKind::Amsgrad) => {
                let bc1 = 1.0 - hp.beta1.powi(t);
                let bc2 = 1.0 - hp.beta2.powi(t);
                for ((((p, m), v), vm), &g) in
                    params.iter_mut().zip(first).zip(second).zip(second_max).zip(grads)
                {
                    *m = hp.beta1 * *m + (1.0 - hp.beta1) * g;
                    *v = hp.beta2 * *v + (1.0 - hp.beta2) * g * g;
                    let vhat = *v / bc2;
                    *vm = vm.max(vhat);
                    *p -= lr * (*m / bc1) / (vm.sqrt() + hp.epsilon);
                }
            }
            (Slots::FtrlState { accum, linear }, OptimizerKind::Ftrl) => {
                // Follow-the-regularized-leader, proximal form. With
                // l1 = l2 = 0 and power -0.5 this reduces to
                // θ = -lr·z/√accum.
                let p_pow = -hp.lr_power;
                for (((theta, n_acc), z), &g) in
                    params.iter_mut().zip(accum).zip(linear).zip(grads)
                {
                    let new_acc = *n_acc + g * g;
                    let sigma = (new_acc.powf(p_pow) - n_acc.powf(p_pow)) / lr;
                    *z += g - sigma * *theta;
                    *n_acc = new_acc;
                    if z.abs() <= hp.l1 {
                        *theta = 0.0;
                    } else {
                        let quadratic = new_acc.powf(p_pow) / lr + 2.0 * hp.l2;
                        *theta = -(*z - z.signum() * hp.l1) / quadratic;
                    }
                }
            }
            _ => unreachable!("slot shape always matches the optimizer kind"),
        }
        Ok(())
    }
}

/// Where the initial coefficient vector comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitStrategy {
    /// Segment-wise least-squares optimum of the data.
    L2Optimum,
    Zero,
    /// Independent uniform draws on [-1, 1] from a seeded generator.
    Random,
}

impl std::str::FromStr for InitStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l2" | "l2opt" | "l2optimum" => Ok(InitStrategy::L2Optimum),
            "zero" => Ok(InitStrategy::Zero),
            "random" => Ok(InitStrategy::Random),
            other => Err(Error::invalid(format!(
                "unknown init strategy '{other}' (expected 'l2', 'zero' or 'random')"
            ))),
        }
    }
}

impl std::fmt::Display for InitStrategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            InitStrategy::L2Optimum => "l2",
            InitStrategy::Zero => "zero",
            InitStrategy::Random => "random",
        })
    }
}

/// Starting model for training.
pub fn initialize(
    data: &SampleSet,
    knots: &[f64],
    degree: usize,
    basis: Basis,
    strategy: InitStrategy,
    seed: u64,
) -> Result<PiecewisePolynomial> {
    match strategy {
        InitStrategy::L2Optimum => fit_segmentwise(data, knots, degree, basis),
        InitStrategy::Zero => PiecewisePolynomial::zeros(knots.to_vec(), degree, basis),
        InitStrategy::Random => {
            let mut pp = PiecewisePolynomial::zeros(knots.to_vec(), degree, basis)?;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let theta: Vec<f64> = (0..pp.num_segments() * (degree + 1))
                .map(|_| rng.gen_range(-1.0..=1.0))
                .collect();
            pp.set_coeffs_flat(&theta);
            Ok(pp)
        }
    }
}

/// Everything a single training run needs besides the data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub optimizer: OptimizerKind,
    pub hyper: Hyperparams,
    pub lr: f64,
    pub epochs: usize,
    /// Consecutive non-improving epochs tolerated before stopping;
    /// 0 disables early stopping.
    pub patience: usize,
    pub init: InitStrategy,
    pub loss: LossConfig,
    pub seed: u64,
}

impl Default for TrainConfig {
    /// The workhorse setup: AMSGrad at 0.1 from the segment-wise
    /// optimum, 2000 epochs with patience 500.
    fn default() -> Self {
        TrainConfig {
            optimizer: OptimizerKind::Amsgrad,
            hyper: Hyperparams::default(),
            lr: 0.1,
            epochs: 2000,
            patience: 500,
            init: InitStrategy::L2Optimum,
            loss: LossConfig::default(),
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lr > 0.0) || !self.lr.is_finite() {
            return Err(Error::invalid(format!(
                "learning rate must be positive, got {}",
                self.lr
            )));
        }
        if self.epochs == 0 {
            return Err(Error::invalid("epoch count must be at least 1"));
        }
        if self.patience > self.epochs {
            return Err(Error::invalid(format!(
                "patience {} exceeds epoch count {}",
                self.patience, self.epochs
            )));
        }
        Ok(())
    }
}

/// Loss values of one recorded epoch. Epoch 0 is the initial state,
/// before any update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub total: f64,
    pub l2: f64,
    pub ck: f64,
}

#[derive(Debug, Clone)]
pub struct TrainingTrace {
    pub records: Vec<EpochRecord>,
    pub best_epoch: usize,
    pub stopped_early: bool,
}

impl TrainingTrace {
    pub fn best(&self) -> &EpochRecord {
        &self.records[self.best_epoch]
    }

    pub fn last(&self) -> &EpochRecord {
        self.records.last().expect("trace always holds epoch 0")
    }
}

/// A finished run: the best model seen and the full loss history.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: PiecewisePolynomial,
    pub trace: TrainingTrace,
}

/// Full-batch gradient descent. Records epoch 0 (the initial state),
/// then one record per update. Returns the coefficients of the best
/// recorded epoch — which is the initial state whenever no update
/// improved on it. A non-finite loss aborts with the offending epoch.
pub fn train(
    data: &SampleSet,
    knots: &[f64],
    degree: usize,
    basis: Basis,
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    cfg.loss.validate(degree)?;

    let mut pp = initialize(data, knots, degree, basis, cfg.init, cfg.seed)?;
    let mut theta = pp.coeffs_flat();
    let mut optimizer = Optimizer::with_hyperparams(cfg.optimizer, cfg.lr, cfg.hyper)?;

    let first = losses(&pp, data, &cfg.loss)?;
    if !first.total.is_finite() {
        return Err(Error::Diverged { epoch: 0 });
    }
    let mut records = vec![EpochRecord {
        epoch: 0,
        total: first.total,
        l2: first.l2,
        ck: first.ck,
    }];
    let mut best_total = first.total;
    let mut best_theta = theta.clone();
    let mut best_epoch = 0;
    let mut non_improving = 0;
    let mut stopped_early = false;

    for epoch in 1..=cfg.epochs {
        let grads = grad_total(&pp, data, &cfg.loss)?;
        optimizer.step(&mut theta, &grads)?;
        pp.set_coeffs_flat(&theta);
        let b = losses(&pp, data, &cfg.loss)?;
        if !b.total.is_finite() {
            return Err(Error::Diverged { epoch });
        }
        records.push(EpochRecord {
            epoch,
            total: b.total,
            l2: b.l2,
            ck: b.ck,
        });
        if b.total < best_total {
            best_total = b.total;
            best_theta.copy_from_slice(&theta);
            best_epoch = epoch;
            non_improving = 0;
        } else {
            non_improving += 1;
            if cfg.patience > 0 && non_improving >= cfg.patience {
                stopped_early = true;
                break;
            }
        }
    }

    pp.set_coeffs_flat(&best_theta);
    Ok(TrainOutcome {
        model: pp,
        trace: TrainingTrace {
            records,
            best_epoch,
            stopped_early,
        },
    })
}
