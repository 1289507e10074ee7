use super::newton::newton_solve;
use super::{error_control, wrms, DaeSystem, EvalFailure, IntegrationError, IntegratorConfig};

/// NDF correction coefficients by order. Order 1 is plain implicit Euler.
const KAPPA: [f64; 6] = [0.0, 0.0, -1.0 / 9.0, -0.0823, -0.0415, 0.0];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInfo {
    /// Time reached by the accepted step.
    pub t: f64,
    pub tau: f64,
    pub order: usize,
    pub newton_iters: usize,
    /// Attempts discarded before this step was accepted.
    pub rejections: usize,
}

struct Attempt {
    y: Vec<f64>,
    d: Vec<f64>,
    iters: usize,
    contraction: Option<f64>,
    scale: Vec<f64>,
    error: f64,
}

/// Integrator state: backward differences `D[0..]` of the solution at the
/// current step size, with `D[0] = y_n`.
#[derive(Debug, Clone)]
pub struct Ndf {
    cfg: IntegratorConfig,
    t: f64,
    tau: f64,
    order: usize,
    diffs: Vec<Vec<f64>>,
    equal_steps: usize,
    contraction: Option<f64>,
    gamma: [f64; 6],
    alpha: [f64; 6],
    error_const: [f64; 6],
}

fn compute_r(order: usize, factor: f64) -> Vec<Vec<f64>> {
    let n = order + 1;
    let mut m = vec![vec![0.0; n]; n];
    m[0].fill(1.0);
    for i in 1..n {
        for j in 1..n {
            m[i][j] = (i as f64 - 1.0 - factor * j as f64) / i as f64;
        }
    }
    for i in 1..n {
        for j in 0..n {
            m[i][j] *= m[i - 1][j];
        }
    }
    m
}

impl Ndf {
    pub fn new(t0: f64, y0: Vec<f64>, cfg: IntegratorConfig) -> Self {
        let n = y0.len();
        let mut gamma = [0.0; 6];
        for k in 1..6 {
            gamma[k] = gamma[k - 1] + 1.0 / k as f64;
        }
        let mut alpha = [0.0; 6];
        let mut error_const = [0.0; 6];
        for k in 0..6 {
            alpha[k] = (1.0 - KAPPA[k]) * gamma[k];
            error_const[k] = KAPPA[k] * gamma[k] + 1.0 / (k as f64 + 1.0);
        }
        let mut diffs = vec![vec![0.0; n]; cfg.max_order + 3];
        diffs[0] = y0;
        Ndf {
            t: t0,
            tau: cfg.tau0,
            order: 1,
            diffs,
            equal_steps: 0,
            contraction: None,
            gamma,
            alpha,
            error_const,
            cfg,
        }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn y(&self) -> &[f64] {
        &self.diffs[0]
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Backward differences scaled to the current step, `y` first.
    pub fn differences(&self) -> &[Vec<f64>] {
        &self.diffs
    }

    pub fn config(&self) -> &IntegratorConfig {
        &self.cfg
    }

    /// Forgets the history: order 1, zero differences, step `tau`.
    pub fn restart(&mut self, tau: f64) {
        for row in &mut self.diffs[1..] {
            row.fill(0.0);
        }
        self.order = 1;
        self.tau = tau.min(self.cfg.tau_max);
        self.equal_steps = 0;
        self.contraction = None;
    }

    /// Pushes the solution and its first difference through a linear map (a
    /// change of discretization) and drops to order 1. Higher differences
    /// are discarded.
    pub fn remap(&mut self, map: impl Fn(&[f64]) -> Vec<f64>) {
        self.diffs[0] = map(&self.diffs[0]);
        self.diffs[1] = map(&self.diffs[1]);
        let n = self.diffs[0].len();
        for row in &mut self.diffs[2..] {
            *row = vec![0.0; n];
        }
        self.order = 1;
        self.equal_steps = 0;
        self.contraction = None;
    }

    /// Replaces the current solution, e.g. after making it consistent with
    /// the algebraic equations. The differences are kept.
    pub fn correct_solution(&mut self, y: Vec<f64>) {
        assert_eq!(y.len(), self.diffs[0].len(), "solution length changed");
        self.diffs[0] = y;
    }

    /// Changes the step size, rescaling the differences to match.
    pub fn set_tau(&mut self, tau: f64) {
        let factor = tau / self.tau;
        if factor != 1.0 {
            self.rescale(factor);
        }
        self.tau = tau;
        self.equal_steps = 0;
    }

    fn rescale(&mut self, factor: f64) {
        let k = self.order;
        let r = compute_r(k, factor);
        let u = compute_r(k, 1.0);
        let n = self.diffs[0].len();
        let mut ru = vec![vec![0.0; k + 1]; k + 1];
        for i in 0..=k {
            for j in 0..=k {
                ru[i][j] = (0..=k).map(|m| r[i][m] * u[m][j]).sum();
            }
        }
        let old: Vec<Vec<f64>> = self.diffs[..=k].to_vec();
        for (i, row) in self.diffs[..=k].iter_mut().enumerate() {
            for v in 0..n {
                row[v] = (0..=k).map(|j| ru[j][i] * old[j][v]).sum();
            }
        }
    }

    fn attempt<S: DaeSystem>(&self, sys: &mut S) -> Result<Attempt, EvalFailure> {
        let k = self.order;
        let n = self.diffs[0].len();
        let mut y_pred = vec![0.0; n];
        for row in &self.diffs[..=k] {
            for (p, v) in y_pred.iter_mut().zip(row) {
                *p += v;
            }
        }
        let mut psi = vec![0.0; n];
        for j in 1..=k {
            let w = self.gamma[j] / self.alpha[k];
            for (p, v) in psi.iter_mut().zip(&self.diffs[j]) {
                *p += w * v;
            }
        }
        let c = self.tau / self.alpha[k];
        let scale: Vec<f64> =
            y_pred.iter().map(|v| self.cfg.abs_tol + self.cfg.rel_tol * v.abs()).collect();
        let t_new = self.t + self.tau;
        let out = newton_solve(sys, t_new, &y_pred, &psi, c, self.tau, &scale, self.contraction, &self.cfg)?;
        sys.admissible(&out.y)?;
        let scale: Vec<f64> =
            out.y.iter().map(|v| self.cfg.abs_tol + self.cfg.rel_tol * v.abs()).collect();
        let err: Vec<f64> = out.d.iter().map(|v| self.error_const[k] * v).collect();
        let error = wrms(&err, &scale);
        Ok(Attempt { y: out.y, d: out.d, iters: out.iterations, contraction: out.contraction, scale, error })
    }

    fn accept(&mut self, att: &Attempt) {
        let k = self.order;
        self.t += self.tau;
        self.contraction = att.contraction;
        self.equal_steps += 1;
        let (head, tail) = self.diffs.split_at_mut(k + 2);
        for ((dst, prev), dv) in tail[0].iter_mut().zip(&head[k + 1]).zip(&att.d) {
            *dst = dv - prev;
        }
        head[k + 1].copy_from_slice(&att.d);
        for i in (0..=k).rev() {
            let (lo, hi) = self.diffs.split_at_mut(i + 1);
            for (a, b) in lo[i].iter_mut().zip(&hi[0]) {
                *a += b;
            }
        }
        debug_assert!(self.diffs[0].iter().zip(&att.y).all(|(a, b)| (a - b).abs() <= 1e-9 * (1.0 + b.abs())));
    }

    fn shrink(&mut self, factor: f64) {
        self.rescale(factor);
        self.tau *= factor;
        self.equal_steps = 0;
    }

    /// Takes one accepted step, never passing `t_stop`. A step that would
    /// end just short of `t_stop` is stretched to land on it.
    pub fn step<S: DaeSystem>(&mut self, sys: &mut S, t_stop: f64) -> Result<StepInfo, IntegrationError> {
        let mut rejections = 0;
        let mut reason = String::from("none");
        loop {
            let remaining = t_stop - self.t;
            if remaining < 1.1 * self.tau && remaining > 0.0 {
                self.set_tau(remaining);
            }
            if self.tau < self.cfg.tau_min {
                return Err(IntegrationError::StepUnderflow { t: self.t, tau: self.tau, reason });
            }
            let att = match self.attempt(sys) {
                Ok(a) => a,
                Err(e) => {
                    reason = e.0;
                    rejections += 1;
                    self.shrink(0.5);
                    continue;
                }
            };
            let decision = error_control(att.error, self.order, self.tau, &self.cfg);
            if !decision.accept {
                reason = format!("local error {:.3e}", att.error);
                rejections += 1;
                self.shrink(decision.tau_next / self.tau);
                continue;
            }
            let info = StepInfo {
                t: self.t + self.tau,
                tau: self.tau,
                order: self.order,
                newton_iters: att.iters,
                rejections,
            };
            self.accept(&att);
            self.select_next(&att);
            return Ok(info);
        }
    }

    fn select_next(&mut self, att: &Attempt) {
        let k = self.order;
        if self.equal_steps < k + 1 {
            return;
        }
        let est = |row: &[f64], coef: f64| -> f64 {
            let e: Vec<f64> = row.iter().map(|v| coef * v).collect();
            wrms(&e, &att.scale)
        };
        let err_m = if k > 1 { est(&self.diffs[k], self.error_const[k - 1]) } else { f64::INFINITY };
        let err_p = if k < self.cfg.max_order {
            est(&self.diffs[k + 2], self.error_const[k + 1])
        } else {
            f64::INFINITY
        };
        let gain = |e: f64, q: usize| if e == 0.0 { f64::INFINITY } else { e.powf(-1.0 / q as f64) };
        let factors = [gain(err_m, k), gain(att.error, k + 1), gain(err_p, k + 2)];
        let (best, &top) = factors
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("three candidates");
        self.order = k + best - 1;
        let factor = (self.cfg.safety * top).min(self.cfg.max_factor).min(self.cfg.tau_max / self.tau);
        self.shrink(factor);
    }

    /// Fixed-step variant used for convergence studies: no error control,
    /// the order rises by one after `k + 1` steps at order `k`, up to `order`.
    pub fn step_fixed<S: DaeSystem>(&mut self, sys: &mut S, order: usize) -> Result<StepInfo, EvalFailure> {
        let att = self.attempt(sys)?;
        let info = StepInfo {
            t: self.t + self.tau,
            tau: self.tau,
            order: self.order,
            newton_iters: att.iters,
            rejections: 0,
        };
        self.accept(&att);
        if self.order < order.min(self.cfg.max_order) && self.equal_steps > self.order {
            self.order += 1;
            self.equal_steps = 0;
        }
        Ok(info)
    }
}
