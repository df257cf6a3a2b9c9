//! Negative log-likelihood and its exact gradient by backpropagation
//! through time.
//!
//! In U(1) mode a site whose conditional was projected onto a single
//! allowed value contributes `ln 1 = 0` to the loss whatever the
//! parameters are, so it emits no gradient. The hidden state still flows
//! through it to later sites.

use ndarray::linalg::general_mat_mul;
use ndarray::{Array2, ArrayView2, Axis, Zip};

use crate::error::{Error, Result};
use crate::rnn::{self, CellWeights, GradientSet, RnnParameters, StepCache, SymmetryMode, Trace};

fn first_violation(log_p: &[f64]) -> Option<usize> {
    log_p.iter().position(|&lp| lp == f64::NEG_INFINITY)
}

fn mean_nll(log_p: &[f64]) -> Result<f64> {
    if let Some(index) = first_violation(log_p) {
        return Err(Error::SymmetryViolatedSample { index });
    }
    Ok(-log_p.iter().sum::<f64>() / log_p.len() as f64)
}

/// `-(1/|B|) Σ_σ ln p(σ)` over a batch.
pub fn nll<S: AsRef<[u8]>>(params: &RnnParameters, batch: &[S], mode: SymmetryMode) -> Result<f64> {
    mean_nll(&rnn::log_probs(params, batch, mode)?)
}

/// Gradient of [`nll`] with respect to every parameter.
pub fn nll_gradient<S: AsRef<[u8]>>(
    params: &RnnParameters,
    batch: &[S],
    mode: SymmetryMode,
) -> Result<GradientSet> {
    Ok(nll_and_gradient(params, batch, mode)?.1)
}

/// Loss and gradient from a single forward/backward sweep.
pub fn nll_and_gradient<S: AsRef<[u8]>>(
    params: &RnnParameters,
    batch: &[S],
    mode: SymmetryMode,
) -> Result<(f64, GradientSet)> {
    let (log_p, trace) = rnn::forward(params, batch, mode, true)?;
    let loss = mean_nll(&log_p)?;
    let trace = trace.expect("trace requested");
    Ok((loss, backward(params, batch, &trace)))
}

fn backward<S: AsRef<[u8]>>(params: &RnnParameters, batch: &[S], trace: &Trace) -> GradientSet {
    let bsz = batch.len();
    let n = trace.probs.len();
    let inv = 1.0 / bsz as f64;
    let mut grads = GradientSet::zeros_like(params);
    let g = &mut grads.0;
    let mut dh_next = Array2::<f64>::zeros((bsz, params.d_h()));
    let mut dlogits = Array2::<f64>::zeros((bsz, 2));
    let mut inputs = vec![0u8; bsz];

    for t in (0..n).rev() {
        let y = &trace.probs[t];
        for b in 0..bsz {
            let s = batch[b].as_ref()[t] as usize;
            if trace.active[t][b] {
                dlogits[[b, 0]] = (y[[b, 0]] - f64::from(s == 0)) * inv;
                dlogits[[b, 1]] = (y[[b, 1]] - f64::from(s == 1)) * inv;
            } else {
                dlogits[[b, 0]] = 0.0;
                dlogits[[b, 1]] = 0.0;
            }
            inputs[b] = if t == 0 { 0 } else { batch[b].as_ref()[t - 1] };
        }
        let h_t = &trace.hidden[t + 1];
        general_mat_mul(1.0, &dlogits.t(), h_t, 1.0, &mut g.v);
        g.c += &dlogits.sum_axis(Axis(0));
        let mut dh = dh_next;
        general_mat_mul(1.0, &dlogits, &params.v, 1.0, &mut dh);
        dh_next = cell_backward(
            params,
            &mut g.cell,
            &trace.caches[t],
            trace.hidden[t].view(),
            h_t.view(),
            &inputs,
            dh,
        );
    }
    grads
}

/// Adds the rows of `da` into the columns of `dw` selected by each input spin.
fn accumulate_input(dw: &mut Array2<f64>, da: &Array2<f64>, inputs: &[u8]) {
    for (row, &s) in da.axis_iter(Axis(0)).zip(inputs) {
        let mut col = dw.column_mut(s as usize);
        col += &row;
    }
}

/// Backpropagates `dh = ∂L/∂h_t` through one cell step, accumulating weight
/// gradients and returning `∂L/∂h_{t-1}`.
fn cell_backward(
    params: &RnnParameters,
    grads: &mut CellWeights,
    cache: &StepCache,
    h_prev: ArrayView2<f64>,
    h: ArrayView2<f64>,
    inputs: &[u8],
    dh: Array2<f64>,
) -> Array2<f64> {
    match (&params.cell, grads, cache) {
        (
            CellWeights::Vanilla { u, .. },
            CellWeights::Vanilla {
                w: gw,
                u: gu,
                b: gb,
            },
            StepCache::Vanilla,
        ) => {
            let mut da = dh;
            Zip::from(&mut da)
                .and(&h)
                .for_each(|d, &h| *d *= 1.0 - h * h);
            general_mat_mul(1.0, &da.t(), &h_prev, 1.0, gu);
            *gb += &da.sum_axis(Axis(0));
            accumulate_input(gw, &da, inputs);
            da.dot(u)
        }
        (
            CellWeights::Gru { u_z, u_r, u_h, .. },
            CellWeights::Gru {
                w_z: gw_z,
                w_r: gw_r,
                w_h: gw_h,
                u_z: gu_z,
                u_r: gu_r,
                u_h: gu_h,
                b_z: gb_z,
                b_r: gb_r,
                b_h: gb_h,
            },
            StepCache::Gru { z, r, h_cand },
        ) => {
            // h = (1 - z) h_prev + z ĥ
            let mut daz = Array2::zeros(dh.raw_dim());
            let mut dah = Array2::zeros(dh.raw_dim());
            Zip::from(&mut daz)
                .and(&mut dah)
                .and(&dh)
                .and(z)
                .and(h_cand)
                .and(&h_prev)
                .for_each(|daz, dah, &d, &z, &hc, &hp| {
                    *daz = d * (hc - hp) * z * (1.0 - z);
                    *dah = d * z * (1.0 - hc * hc);
                });
            let mut dh_prev = dh;
            Zip::from(&mut dh_prev)
                .and(z)
                .for_each(|d, &z| *d *= 1.0 - z);

            // ĥ = tanh(W_h x + U_h (r ⊙ h_prev) + b_h)
            let rh = r * &h_prev;
            general_mat_mul(1.0, &dah.t(), &rh, 1.0, gu_h);
            *gb_h += &dah.sum_axis(Axis(0));
            accumulate_input(gw_h, &dah, inputs);
            let drh = dah.dot(u_h);
            let mut dar = Array2::zeros(dh_prev.raw_dim());
            Zip::from(&mut dar)
                .and(&mut dh_prev)
                .and(&drh)
                .and(r)
                .and(&h_prev)
                .for_each(|dar, dhp, &drh, &r, &hp| {
                    *dar = drh * hp * r * (1.0 - r);
                    *dhp += drh * r;
                });

            // z and r gates
            general_mat_mul(1.0, &daz.t(), &h_prev, 1.0, gu_z);
            general_mat_mul(1.0, &dar.t(), &h_prev, 1.0, gu_r);
            *gb_z += &daz.sum_axis(Axis(0));
            *gb_r += &dar.sum_axis(Axis(0));
            accumulate_input(gw_z, &daz, inputs);
            accumulate_input(gw_r, &dar, inputs);
            general_mat_mul(1.0, &daz, u_z, 1.0, &mut dh_prev);
            general_mat_mul(1.0, &dar, u_r, 1.0, &mut dh_prev);
            dh_prev
        }
        _ => unreachable!("gradient and cache layouts follow the parameters"),
    }
}

/// Central differences `(f(x + h e_k) - f(x - h e_k)) / 2h` per coordinate.
pub fn central_difference(f: impl Fn(&[f64]) -> f64, x: &[f64], step: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|k| {
            probe[k] = x[k] + step;
            let up = f(&probe);
            probe[k] = x[k] - step;
            let down = f(&probe);
            probe[k] = x[k];
            (up - down) / (2.0 * step)
        })
        .collect()
}

/// Finite-difference estimate of [`nll_gradient`].
pub fn finite_diff_gradient<S: AsRef<[u8]>>(
    params: &RnnParameters,
    batch: &[S],
    mode: SymmetryMode,
    step: f64,
) -> Result<GradientSet> {
    if step.is_nan() || step <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "step {step} must be positive"
        )));
    }
    // Surface errors (e.g. sector violations) before probing.
    nll(params, batch, mode)?;
    let x = params.flatten();
    let loss = |theta: &[f64]| {
        let p = params.with_flat(theta).expect("same length");
        nll(&p, batch, mode).expect("validated batch")
    };
    let g = central_difference(loss, &x, step);
    Ok(GradientSet(params.with_flat(&g)?))
}

/// Richardson extrapolation of two central differences,
/// `(4 D(h/2) - D(h)) / 3`. The `h²` truncation terms cancel, so `step`
/// can be large enough that rounding in the loss stays negligible.
pub fn richardson_gradient<S: AsRef<[u8]>>(
    params: &RnnParameters,
    batch: &[S],
    mode: SymmetryMode,
    step: f64,
) -> Result<GradientSet> {
    let coarse = finite_diff_gradient(params, batch, mode, step)?.flatten();
    let fine = finite_diff_gradient(params, batch, mode, step / 2.0)?.flatten();
    let g: Vec<f64> = coarse
        .iter()
        .zip(&fine)
        .map(|(c, f)| (4.0 * f - c) / 3.0)
        .collect();
    Ok(GradientSet(params.with_flat(&g)?))
}

/// Plain SGD, `θ ← θ - lr·g`.
pub fn sgd_step(params: &RnnParameters, grads: &GradientSet, lr: f64) -> Result<RnnParameters> {
    let mut out = params.clone();
    sgd_update(&mut out, grads, lr)?;
    Ok(out)
}

/// In-place [`sgd_step`].
pub fn sgd_update(params: &mut RnnParameters, grads: &GradientSet, lr: f64) -> Result<()> {
    if !params.same_shape(grads) {
        return Err(Error::DimensionMismatch(
            "gradient shapes differ from the parameters".into(),
        ));
    }
    let g = grads.tensors();
    for ((_, p), (_, _, g)) in params.tensors_mut().into_iter().zip(g) {
        p.iter_mut().zip(g).for_each(|(p, g)| *p -= lr * g);
    }
    Ok(())
}
