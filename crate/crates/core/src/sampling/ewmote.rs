//! Imputation-based generation: EMICIL (uniform bases) and EWMOTE
//! (bases drawn from the MWMOTE selection distribution).
//!
//! Each synthetic row copies a base minority row, masks one uniformly chosen
//! attribute and refills it from a Gaussian fitted on the minority rows.

use crate::data::{RowMatrix, SamplerParams};
use crate::error::Result;
use crate::imputation::{fit_gaussian, impute_stochastic, GaussianModel, SingleMaskImputer};
use crate::rng::RandomSource;
use crate::sampling::mwmote::selection_probabilities;
use crate::sampling::smote::random_oversample;

struct MaskImputer {
    model: GaussianModel,
    single: Option<SingleMaskImputer>,
    stochastic: bool,
}

impl MaskImputer {
    fn fit(minority: &RowMatrix, params: &SamplerParams) -> Result<Self> {
        let model = fit_gaussian(minority, params.emi_ridge)?;
        let single = if model.dim() >= 2 {
            Some(SingleMaskImputer::new(&model)?)
        } else {
            None
        };
        Ok(Self {
            model,
            single,
            stochastic: params.stochastic_imputation,
        })
    }

    fn fill(&self, base: &[f64], rng: &mut RandomSource) -> Result<Vec<f64>> {
        let attr = rng.below(base.len());
        if self.stochastic {
            return impute_stochastic(&self.model, base, &[attr], rng);
        }
        Ok(match &self.single {
            Some(s) => s.impute(base, attr),
            None => self.model.mean.clone(),
        })
    }
}

/// `n` synthetic rows from uniformly drawn minority bases.
pub fn emicil(minority: &RowMatrix, n: usize, params: &SamplerParams, rng: &mut RandomSource) -> Result<RowMatrix> {
    let m = minority.n_rows();
    if m < 2 {
        log::warn!("EMICIL needs >= 2 minority rows, got {m}; falling back to random oversampling");
        return random_oversample(minority, n, rng);
    }
    let imputer = MaskImputer::fit(minority, params)?;
    let mut out = RowMatrix::new(minority.n_cols());
    for _ in 0..n {
        let base = minority.row(rng.below(m));
        out.push_row(&imputer.fill(base, rng)?)?;
    }
    Ok(out)
}

/// `n` synthetic rows with bases drawn from `S_imin` by `S_p`.
pub fn ewmote_synthetic(
    majority: &RowMatrix,
    minority: &RowMatrix,
    n: usize,
    params: &SamplerParams,
    rng: &mut RandomSource,
) -> Result<RowMatrix> {
    let m = minority.n_rows();
    if m < 2 {
        log::warn!("EWMOTE needs >= 2 minority rows, got {m}; falling back to random oversampling");
        return random_oversample(minority, n, rng);
    }
    let weighted = selection_probabilities(minority, majority, params)?;
    if weighted.informative.is_empty() {
        log::warn!("no informative minority rows; EWMOTE falls back to EMICIL");
        return emicil(minority, n, params, rng);
    }
    let imputer = MaskImputer::fit(minority, params)?;
    let cumulative = weighted.cumulative();
    let mut out = RowMatrix::new(minority.n_cols());
    for _ in 0..n {
        let base = weighted.informative[rng.choose_cumulative(&cumulative)];
        out.push_row(&imputer.fill(minority.row(base), rng)?)?;
    }
    Ok(out)
}

/// The oversampled minority set `S_omin`: the minority rows followed by `n`
/// synthetic rows.
pub fn ewmote(majority: &RowMatrix, minority: &RowMatrix, n: usize, params: &SamplerParams, rng: &mut RandomSource) -> Result<RowMatrix> {
    let mut out = minority.clone();
    out.extend(&ewmote_synthetic(majority, minority, n, params, rng)?)?;
    Ok(out)
}
