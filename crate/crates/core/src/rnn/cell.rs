//! Batched recurrent cells.
//!
//! Hidden states are stored row-wise (`batch × d_h`), so `U h` becomes
//! `H Uᵀ`. One-hot inputs select a column of `W`.

use ndarray::{Array1, Array2, ArrayView2, Axis, Zip};

use super::params::{CellWeights, RnnParameters};
use super::{Conditional, HiddenState};
use crate::error::{Error, Result};

/// Intermediate values of one batched step, kept for backpropagation.
#[derive(Debug, Clone)]
pub(crate) enum StepCache {
    Vanilla,
    Gru {
        z: Array2<f64>,
        r: Array2<f64>,
        h_cand: Array2<f64>,
    },
}

#[inline]
pub(crate) fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// `H Uᵀ + b + W[:, s]` for every row.
fn affine(
    h_prev: &ArrayView2<f64>,
    inputs: &[u8],
    w: &Array2<f64>,
    u: &Array2<f64>,
    b: &Array1<f64>,
) -> Array2<f64> {
    let mut a = h_prev.dot(&u.t());
    for (mut row, &s) in a.axis_iter_mut(Axis(0)).zip(inputs) {
        let col = w.column(s as usize);
        Zip::from(&mut row)
            .and(&col)
            .and(b)
            .for_each(|x, &wc, &bb| *x += wc + bb);
    }
    a
}

/// Advances every row of `h_prev` by one step given the previous spins.
pub(crate) fn step(
    params: &RnnParameters,
    inputs: &[u8],
    h_prev: ArrayView2<f64>,
) -> (Array2<f64>, StepCache) {
    match &params.cell {
        CellWeights::Vanilla { w, u, b } => {
            let mut h = affine(&h_prev, inputs, w, u, b);
            h.mapv_inplace(f64::tanh);
            (h, StepCache::Vanilla)
        }
        CellWeights::Gru {
            w_z,
            w_r,
            w_h,
            u_z,
            u_r,
            u_h,
            b_z,
            b_r,
            b_h,
        } => {
            let mut z = affine(&h_prev, inputs, w_z, u_z, b_z);
            z.mapv_inplace(sigmoid);
            let mut r = affine(&h_prev, inputs, w_r, u_r, b_r);
            r.mapv_inplace(sigmoid);
            let rh = &r * &h_prev;
            let mut h_cand = affine(&rh.view(), inputs, w_h, u_h, b_h);
            h_cand.mapv_inplace(f64::tanh);
            let mut h = Array2::zeros(h_prev.raw_dim());
            Zip::from(&mut h)
                .and(&h_prev)
                .and(&z)
                .and(&h_cand)
                .for_each(|h, &hp, &z, &hc| *h = (1.0 - z) * hp + z * hc);
            (h, StepCache::Gru { z, r, h_cand })
        }
    }
}

/// Row-wise softmax of `H Vᵀ + c`.
pub(crate) fn output(params: &RnnParameters, h: ArrayView2<f64>) -> Array2<f64> {
    let mut logits = h.dot(&params.v.t());
    for mut row in logits.axis_iter_mut(Axis(0)) {
        let (l0, l1) = (row[0] + params.c[0], row[1] + params.c[1]);
        let m = l0.max(l1);
        let (e0, e1) = ((l0 - m).exp(), (l1 - m).exp());
        let z = e0 + e1;
        row[0] = e0 / z;
        row[1] = e1 / z;
    }
    logits
}

fn check_hidden(params: &RnnParameters, h: &HiddenState) -> Result<()> {
    if h.0.len() != params.d_h() {
        return Err(Error::DimensionMismatch(format!(
            "hidden state has length {}, d_h = {}",
            h.0.len(),
            params.d_h()
        )));
    }
    Ok(())
}

fn check_spin(s: u8) -> Result<()> {
    if s > 1 {
        return Err(Error::InvalidArgument(format!(
            "spin value {s} is not 0 or 1"
        )));
    }
    Ok(())
}

fn single_step(params: &RnnParameters, prev_spin: u8, prev: &HiddenState) -> HiddenState {
    let h_prev = prev.0.view().insert_axis(Axis(0));
    let (h, _) = step(params, &[prev_spin], h_prev);
    HiddenState(h.row(0).to_owned())
}

/// `h_i = tanh(W σ_{i-1} + U h_{i-1} + b)`.
pub fn vanilla_cell(
    params: &RnnParameters,
    prev_spin: u8,
    prev_hidden: &HiddenState,
) -> Result<HiddenState> {
    if !matches!(params.cell, CellWeights::Vanilla { .. }) {
        return Err(Error::DimensionMismatch(
            "parameters are not a vanilla cell".into(),
        ));
    }
    check_spin(prev_spin)?;
    check_hidden(params, prev_hidden)?;
    Ok(single_step(params, prev_spin, prev_hidden))
}

/// Gated recurrent unit step:
///
/// ```text
/// z = σ(W_z x + U_z h + b_z)
/// r = σ(W_r x + U_r h + b_r)
/// ĥ = tanh(W_h x + U_h (r ⊙ h) + b_h)
/// h' = (1 - z) ⊙ h + z ⊙ ĥ
/// ```
pub fn gru_cell(
    params: &RnnParameters,
    prev_spin: u8,
    prev_hidden: &HiddenState,
) -> Result<HiddenState> {
    if !matches!(params.cell, CellWeights::Gru { .. }) {
        return Err(Error::DimensionMismatch(
            "parameters are not a GRU cell".into(),
        ));
    }
    check_spin(prev_spin)?;
    check_hidden(params, prev_hidden)?;
    Ok(single_step(params, prev_spin, prev_hidden))
}

/// `y = softmax(V h + c)`.
pub fn output_distribution(params: &RnnParameters, hidden: &HiddenState) -> Result<Conditional> {
    check_hidden(params, hidden)?;
    let y = output(params, hidden.0.view().insert_axis(Axis(0)));
    Ok(Conditional {
        p0: y[[0, 0]],
        p1: y[[0, 1]],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rnn::CellKind;
    use ndarray::array;

    fn gru_with(d_h: usize, f: impl FnOnce(&mut CellWeights)) -> RnnParameters {
        let mut p = RnnParameters::zeros(CellKind::Gru, d_h);
        f(&mut p.cell);
        p
    }

    #[test]
    fn zero_vanilla_gives_zero() {
        let p = RnnParameters::zeros(CellKind::Vanilla, 3);
        let h = vanilla_cell(&p, 1, &HiddenState::zeros(3)).unwrap();
        assert_eq!(h.0, Array1::<f64>::zeros(3));
    }

    #[test]
    fn scalar_vanilla_hand_value() {
        let mut p = RnnParameters::zeros(CellKind::Vanilla, 1);
        if let CellWeights::Vanilla { w, .. } = &mut p.cell {
            *w = array![[1.0, 0.0]];
        }
        let h = vanilla_cell(&p, 0, &HiddenState::zeros(1)).unwrap();
        assert!((h.0[0] - 0.761_594_155_955_764_9).abs() < 1e-15);
        let h = vanilla_cell(&p, 1, &HiddenState::zeros(1)).unwrap();
        assert_eq!(h.0[0], 0.0);
    }

    #[test]
    fn zero_gru_halves_the_state() {
        let p = RnnParameters::zeros(CellKind::Gru, 3);
        let h = gru_cell(&p, 0, &HiddenState::zeros(3)).unwrap();
        assert_eq!(h.0, Array1::<f64>::zeros(3));
        let prev = HiddenState(array![0.4, -1.0, 2.0]);
        let h = gru_cell(&p, 1, &prev).unwrap();
        assert_eq!(h.0, array![0.2, -0.5, 1.0]);
    }

    #[test]
    fn saturated_update_gate_discards_history() {
        let p = gru_with(1, |c| {
            if let CellWeights::Gru { b_z, .. } = c {
                b_z[0] = 10.0;
            }
        });
        let h = gru_cell(&p, 0, &HiddenState(array![0.8])).unwrap();
        // z = σ(10), ĥ = tanh(0) = 0, so h = (1 - z)·0.8.
        let expected = (1.0 - sigmoid(10.0)) * 0.8;
        assert!((h.0[0] - expected).abs() < 1e-15);
        assert!(h.0[0].abs() < 5e-5);
    }

    #[test]
    fn cell_kind_and_shape_checks() {
        let g = RnnParameters::zeros(CellKind::Gru, 2);
        assert!(vanilla_cell(&g, 0, &HiddenState::zeros(2)).is_err());
        assert!(gru_cell(&g, 0, &HiddenState::zeros(3)).is_err());
        assert!(gru_cell(&g, 2, &HiddenState::zeros(2)).is_err());
    }

    #[test]
    fn softmax_outputs() {
        let mut p = RnnParameters::zeros(CellKind::Vanilla, 2);
        let y = output_distribution(&p, &HiddenState::zeros(2)).unwrap();
        assert_eq!((y.p0, y.p1), (0.5, 0.5));
        p.c = array![3f64.ln(), 0.0];
        let y = output_distribution(&p, &HiddenState(array![0.3, -0.2])).unwrap();
        assert!((y.p0 - 0.75).abs() < 1e-15 && (y.p1 - 0.25).abs() < 1e-15);
    }

    #[test]
    fn softmax_is_normalised_for_large_logits() {
        let mut p = RnnParameters::zeros(CellKind::Gru, 2);
        p.v = array![[400.0, -300.0], [-250.0, 800.0]];
        let y = output_distribution(&p, &HiddenState(array![0.9, -0.7])).unwrap();
        assert!((y.p0 + y.p1 - 1.0).abs() < 1e-12);
        assert!(y.p0.is_finite() && y.p1.is_finite());
    }
}
