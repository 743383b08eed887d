//! Riemannian trust-region method with a truncated conjugate-gradient
//! (Steihaug-Toint) inner solver.
//!
//! The outer loop follows the usual ratio test: a step is accepted when the
//! actual decrease is at least a tenth of the decrease predicted by the
//! quadratic model and the objective does not go up. The radius is cut by 4
//! on poor agreement and doubled (up to the cap) when a good step hits the
//! boundary.
//!
//! Once the design potential falls below the zero threshold the run keeps
//! taking Newton-like steps for a bounded number of iterations, using the
//! double-double objective for the acceptance test. This drives the iterate
//! to the variety at working precision instead of stopping a square root of
//! the threshold away from it.

use super::domain::Domain;
use super::objective::Objective;
use super::Convergence;
use crate::design::kernels::dot;

const ACCEPT_RATIO: f64 = 0.1;
const RHO_REGULARIZATION: f64 = 1e3;
const CG_THETA: f64 = 1.0;
const CG_KAPPA: f64 = 0.1;
const MAX_POLISH_ITERATIONS: usize = 40;
/// Gradient norm below which polishing is considered complete.
const POLISH_GRADIENT: f64 = 1e-13;

#[derive(Clone, Debug)]
pub(crate) struct TrustRegionSettings {
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    pub zero_threshold: f64,
    pub max_radius: f64,
}

#[derive(Clone, Debug)]
pub(crate) struct RunOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub converged: Convergence,
    /// Objective (double-double evaluation) after every accepted step,
    /// starting with the initial point.
    pub history: Vec<f64>,
}

struct Scratch {
    eta: Vec<f64>,
    h_eta: Vec<f64>,
    r: Vec<f64>,
    delta: Vec<f64>,
    h_delta: Vec<f64>,
}

impl Scratch {
    fn new(len: usize) -> Self {
        Self {
            eta: vec![0.0; len],
            h_eta: vec![0.0; len],
            r: vec![0.0; len],
            delta: vec![0.0; len],
            h_delta: vec![0.0; len],
        }
    }
}

fn riemannian_hessian<O: Objective>(
    obj: &O,
    domain: &Domain,
    x: &[f64],
    egrad: &[f64],
    v: &[f64],
    out: &mut [f64],
) {
    obj.hessian_vector(x, v, out);
    domain.hessian_correction(x, egrad, v, out);
}

/// Approximately minimizes `<g,e> + 1/2 <e,He>` over `|e| <= radius`.
/// Leaves the step in `s.eta` and `H eta` in `s.h_eta`; returns whether the
/// boundary was reached.
#[allow(clippy::too_many_arguments)]
fn truncated_cg<O: Objective>(
    obj: &O,
    domain: &Domain,
    x: &[f64],
    egrad: &[f64],
    rgrad: &[f64],
    radius: f64,
    max_inner: usize,
    s: &mut Scratch,
) -> bool {
    s.eta.iter_mut().for_each(|e| *e = 0.0);
    s.h_eta.iter_mut().for_each(|e| *e = 0.0);
    s.r.copy_from_slice(rgrad);
    for (d, r) in s.delta.iter_mut().zip(&s.r) {
        *d = -r;
    }
    let mut z_r = dot(&s.r, &s.r);
    let r0 = z_r.sqrt();
    let mut e_pe = 0.0;
    let mut e_pd = 0.0;
    let mut d_pd = z_r;
    let radius_sq = radius * radius;

    for _ in 0..max_inner {
        riemannian_hessian(obj, domain, x, egrad, &s.delta, &mut s.h_delta);
        let kappa = dot(&s.delta, &s.h_delta);
        let alpha = z_r / kappa;
        let e_pe_new = e_pe + 2.0 * alpha * e_pd + alpha * alpha * d_pd;
        if kappa <= 0.0 || e_pe_new >= radius_sq || !alpha.is_finite() {
            let tau = (-e_pd + (e_pd * e_pd + d_pd * (radius_sq - e_pe)).max(0.0).sqrt()) / d_pd;
            for i in 0..s.eta.len() {
                s.eta[i] += tau * s.delta[i];
                s.h_eta[i] += tau * s.h_delta[i];
            }
            return true;
        }
        e_pe = e_pe_new;
        for i in 0..s.eta.len() {
            s.eta[i] += alpha * s.delta[i];
            s.h_eta[i] += alpha * s.h_delta[i];
            s.r[i] += alpha * s.h_delta[i];
        }
        domain.project(x, &mut s.r);
        let r_norm = dot(&s.r, &s.r).sqrt();
        if r_norm <= r0 * r0.powf(CG_THETA).min(CG_KAPPA) {
            break;
        }
        let z_r_old = z_r;
        z_r = dot(&s.r, &s.r);
        let beta = z_r / z_r_old;
        for i in 0..s.delta.len() {
            s.delta[i] = -s.r[i] + beta * s.delta[i];
        }
        domain.project(x, &mut s.delta);
        e_pd = beta * (e_pd + alpha * d_pd);
        d_pd = z_r + beta * beta * d_pd;
    }
    false
}

pub(crate) fn run<O: Objective>(
    obj: &O,
    domain: Domain,
    x0: Vec<f64>,
    settings: &TrustRegionSettings,
) -> RunOutcome {
    let len = x0.len();
    let max_inner = domain.dimension().clamp(1, 2000);
    let mut s = Scratch::new(len);
    let mut x = x0;
    let mut x_prop = vec![0.0; len];
    let mut egrad = vec![0.0; len];
    let mut rgrad = vec![0.0; len];

    let mut fx = obj.value_accurate(&x);
    obj.gradient(&x, &mut egrad);
    rgrad.copy_from_slice(&egrad);
    domain.project(&x, &mut rgrad);

    let max_radius = settings.max_radius;
    let mut radius = max_radius / 8.0;
    let mut design_f = obj.design_potential(&x);
    let mut history = vec![fx];
    let mut polish_left: Option<usize> = None;
    let mut iterations = 0;

    let converged = loop {
        let grad_norm = dot(&rgrad, &rgrad).sqrt();
        match polish_left {
            None => {
                if design_f <= settings.zero_threshold {
                    polish_left = Some(MAX_POLISH_ITERATIONS);
                    continue;
                }
                if grad_norm < settings.gradient_tolerance {
                    break Convergence::GradientSmall;
                }
            }
            Some(left) => {
                if left == 0 || grad_norm <= POLISH_GRADIENT {
                    break Convergence::ZeroFound;
                }
            }
        }
        if iterations >= settings.max_iterations {
            break if polish_left.is_some() {
                Convergence::ZeroFound
            } else {
                Convergence::IterationCap
            };
        }
        // No representable step left: the iterate is stationary at working precision.
        if radius < 1e-16 * max_radius {
            break if polish_left.is_some() {
                Convergence::ZeroFound
            } else {
                Convergence::GradientSmall
            };
        }
        iterations += 1;
        if let Some(left) = polish_left.as_mut() {
            *left -= 1;
        }

        let hit_boundary = truncated_cg(obj, &domain, &x, &egrad, &rgrad, radius, max_inner, &mut s);
        let retracted = domain.retract(&x, &s.eta, &mut x_prop);
        let f_prop = if retracted.is_ok() {
            obj.value_accurate(&x_prop)
        } else {
            f64::NAN
        };

        let rho_num = fx - f_prop;
        let rho_den = -dot(&rgrad, &s.eta) - 0.5 * dot(&s.eta, &s.h_eta);
        let offset = fx.abs().max(1.0) * f64::EPSILON * RHO_REGULARIZATION;
        let rho = (rho_num + offset) / (rho_den + offset);
        let model_decreased = rho_den >= 0.0;

        if !rho.is_finite() || rho < 0.25 || !model_decreased {
            radius /= 4.0;
        } else if rho > 0.75 && hit_boundary {
            radius = (2.0 * radius).min(max_radius);
        }

        if model_decreased && rho > ACCEPT_RATIO && f_prop <= fx {
            debug_assert!(f_prop <= fx);
            std::mem::swap(&mut x, &mut x_prop);
            fx = f_prop;
            history.push(fx);
            design_f = obj.design_potential(&x);
            obj.gradient(&x, &mut egrad);
            rgrad.copy_from_slice(&egrad);
            domain.project(&x, &mut rgrad);
        }
    };

    RunOutcome {
        x,
        iterations,
        converged,
        history,
    }
}
