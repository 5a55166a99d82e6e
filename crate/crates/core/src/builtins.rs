//! Bundled targets and genus-zero data sets.

use std::path::Path;

use crate::chen_ruan::{gkm_assemble, GKMTarget};
use crate::error::{Error, Result};
use crate::frobenius::{load_genus_zero, FrobeniusData};
use crate::group::GroupData;

const KLEIN4: &str = include_str!("../data/klein4.json");

const TARGETS: &[(&str, &str)] = &[
    ("point", include_str!("../data/point.json")),
    ("c-z2", include_str!("../data/c_z2.json")),
    ("c3-z3", include_str!("../data/c3_z3.json")),
    ("c2-klein", include_str!("../data/c2_klein.json")),
    ("c3-cy", include_str!("../data/c3_cy.json")),
    ("c3-cy-scaled", include_str!("../data/c3_cy_scaled.json")),
    ("two-point", include_str!("../data/two_point.json")),
    ("two-unit", include_str!("../data/two_unit.json")),
];

/// `(target, genus-zero file)` pairs.
const GENUS_ZERO: &[(&str, &str, &str)] = &[
    (
        "rank2-deformed",
        "two-unit",
        include_str!("../data/rank2_deformed.json"),
    ),
    (
        "rank2-nonassociative",
        "two-unit",
        include_str!("../data/rank2_nonassociative.json"),
    ),
];

pub fn target_names() -> impl Iterator<Item = &'static str> {
    TARGETS.iter().map(|(n, _)| *n)
}

pub fn genus_zero_names() -> impl Iterator<Item = &'static str> {
    GENUS_ZERO.iter().map(|(n, _, _)| *n)
}

pub fn klein_table() -> GroupData {
    GroupData::from_table_json(KLEIN4).expect("bundled table is valid")
}

/// Bundled target by name.  Table references resolve to bundled tables.
pub fn target(name: &str) -> Result<GKMTarget> {
    let text = TARGETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
        .ok_or_else(|| Error::Config(format!("no built-in target `{name}`")))?;
    let mut v: serde_json::Value = serde_json::from_str(text)?;
    if let Some(fps) = v["fixed_points"].as_array_mut() {
        for fp in fps {
            if fp["group"]["table"] == "klein4.json" {
                fp["group"]["table"] = serde_json::from_str(KLEIN4)?;
            }
        }
    }
    GKMTarget::from_json(&v.to_string(), None)
}

/// A target given either as a bundled name or as a file path.
pub fn resolve_target(spec: &str) -> Result<GKMTarget> {
    if TARGETS.iter().any(|(n, _)| *n == spec) {
        return target(spec);
    }
    GKMTarget::from_json_file(Path::new(spec))
}

/// Bundled genus-zero data set together with its target.
pub fn genus_zero(name: &str, t_degree: u32) -> Result<(GKMTarget, FrobeniusData)> {
    let (_, tname, text) = GENUS_ZERO
        .iter()
        .find(|(n, _, _)| *n == name)
        .ok_or_else(|| Error::Config(format!("no built-in genus-zero data `{name}`")))?;
    let t = target(tname)?;
    let alg = gkm_assemble(&t)?;
    let data = load_genus_zero(&alg, text, t_degree)?;
    Ok((t, data))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_targets_assemble() {
        for name in target_names() {
            let t = target(name).unwrap();
            let alg = gkm_assemble(&t).unwrap();
            alg.verify().unwrap_or_else(|e| panic!("{name}: {e}"));
        }
    }

    #[test]
    fn ranks() {
        let rank = |n: &str| gkm_assemble(&target(n).unwrap()).unwrap().rank();
        assert_eq!(rank("point"), 1);
        assert_eq!(rank("c-z2"), 2);
        assert_eq!(rank("c3-z3"), 3);
        assert_eq!(rank("c2-klein"), 4);
        assert_eq!(rank("two-point"), 2);
    }

    #[test]
    fn synthetic_data_loads() {
        let (_, d) = genus_zero("rank2-deformed", 4).unwrap();
        assert_eq!(d.nvars(), 2);
        assert!(d.check_idempotents());
        assert!(d.check_psi_orthogonal());
        assert!(d.check_canonical_pairing());
        assert_eq!(d.inverse_sqrt_delta_check(), Ok(()));
    }

    #[test]
    fn nonassociative_data_rejected() {
        let err = genus_zero("rank2-nonassociative", 4).unwrap_err();
        match err {
            Error::Associativity { degree, .. } => assert_eq!(degree, 1),
            e => panic!("unexpected {e}"),
        }
    }
}
