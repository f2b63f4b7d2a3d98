//! Waiting-time laws: base measures on the positive integers, gap-indexed
//! families (constant, integrable, edge), continuous densities and the
//! grid checks of the model's sufficient conditions.

mod conditions;
mod density;
mod discrete;
mod family;
mod spec;

pub use conditions::{check_cond_conv, check_cond_subadd, CertificateReport, SubaddReport, SubaddSide};
pub use density::{check_noexplosion, make_integrable_density_family, DensityFamily, DensityKind, DensityLaw};
pub use discrete::{DiscreteMeasure, Law};
pub use family::{edge_enumeration_oracle, partial_sum_normalizer, perturbed_family, FamilyKind, MeasureFamily};
pub use spec::{parse_family, parse_law, AnyFamily, FamilySpec};

/// Integrable family from a base law, with the law's default cap.
pub fn make_integrable_family(mu0: &Law) -> crate::Result<MeasureFamily> {
    MeasureFamily::integrable(DiscreteMeasure::from_law(mu0)?)
}

/// Edge-LPP family from a base law.
pub fn make_edge_lpp_family(mu: &Law) -> crate::Result<MeasureFamily> {
    Ok(MeasureFamily::edge_lpp(DiscreteMeasure::from_law(mu)?))
}
