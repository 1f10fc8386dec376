//! Shared fixtures for the benchmarks.

use recur_core::returns::{Mode, ReturnQuery};
use recur_core::{PolyTuple, Region, Scalar, SystemSpec};

/// The three-term rotation query used by the scan benchmarks.
pub fn rotation_query(hi: i64, mode: Mode) -> ReturnQuery {
    let u: Region = "arc(0, 1/20)".parse().expect("region");
    ReturnQuery {
        sys: SystemSpec::TorusRot(vec![Scalar::sqrt2_minus_1()]),
        regions: vec![u.clone(), u.clone(), u],
        tuple: PolyTuple::diagonal(&"n^2".parse().expect("poly"), 2),
        lo: 1,
        hi,
        mode,
    }
}

/// A box query on the skew product, for sample mode.
pub fn skew_query(hi: i64, resolution: u32) -> ReturnQuery {
    let u: Region = "box(arc(-1/40, 1/40), arc(-1/40, 1/40))".parse().expect("region");
    ReturnQuery {
        sys: SystemSpec::Skew2(Scalar::sqrt2_minus_1()),
        regions: vec![u.clone(), u.clone(), u],
        tuple: "(0, n, 2n)".parse().expect("tuple"),
        lo: 1,
        hi,
        mode: Mode::Sample(resolution),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use recur_core::returns::return_set;

    #[test]
    fn fixtures_run() {
        assert!(!return_set(&rotation_query(2000, Mode::Exact)).unwrap().set.is_empty());
        return_set(&skew_query(200, 32)).unwrap();
    }
}
