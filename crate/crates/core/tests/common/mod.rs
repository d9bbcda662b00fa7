#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tradelab::model::{validate_params, Destination, Firm, IncomeGroup, ModelParams, ValidParams};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// One destination, validated, with `(rho - 1) zeta` drawn in `(0.04, max_share]`.
pub fn random_line(rng: &mut ChaCha8Rng, max_share: f64) -> (ValidParams<f64>, Firm<f64>) {
    let rho = rng.random_range(1.5..5.0);
    let share = rng.random_range(0.04..max_share);
    let dest = Destination::new(
        "X",
        share / (rho - 1.0),
        rng.random_range(1.0..100.0),
        rng.random_range(0.5..2.0),
        0.0,
        IncomeGroup::Advanced,
    );
    let params = ModelParams {
        rho,
        alpha: rng.random_range(0.2..0.8),
        wage: rng.random_range(0.5..2.0),
        quality_cost: rng.random_range(0.2..5.0),
        discount: 0.9,
        destinations: vec![dest],
    };
    let firm = Firm::new(
        "f",
        rng.random_range(0.3..3.0),
        rng.random_range(0.3..3.0),
        rng.random_range(0.5..2.0),
    );
    (validate_params(params).unwrap(), firm)
}

pub fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// Home market plus one advanced and one emerging destination, a firm, and a
/// supplier market whose support brackets the firm's participation cutoffs
/// often enough to exercise the panel split.
pub fn random_search_setup(
    rng: &mut ChaCha8Rng,
) -> (ValidParams<f64>, Firm<f64>, tradelab::search::SupplierMarket<f64>) {
    use tradelab::search::{Family, SupplierMarket};
    let rho = rng.random_range(2.0..4.0);
    let bound = 0.85 / (rho - 1.0);
    let dests = vec![
        Destination::domestic("D", rng.random_range(0.0..bound), rng.random_range(5.0..40.0), 1.0),
        Destination::new(
            "R",
            rng.random_range(0.3 * bound..bound),
            rng.random_range(5.0..40.0),
            rng.random_range(0.7..1.5),
            0.0,
            IncomeGroup::Advanced,
        ),
        Destination::new(
            "P",
            rng.random_range(0.0..0.3 * bound),
            rng.random_range(5.0..40.0),
            rng.random_range(0.7..1.5),
            0.0,
            IncomeGroup::Emerging,
        ),
    ];
    let mut params = ModelParams {
        rho,
        alpha: rng.random_range(0.3..0.7),
        wage: 1.0,
        quality_cost: rng.random_range(0.5..2.0),
        discount: rng.random_range(0.8..0.97),
        destinations: dests,
    };
    let firm = Firm::new("f", rng.random_range(0.5..2.0), rng.random_range(0.5..2.0), 1.0);
    let c_low = rng.random_range(0.4..0.8);
    let c_high = rng.random_range(1.3..2.5);
    // Fixed costs equal to gross profit at an efficiency inside the support.
    let probe = validate_params(params.clone()).unwrap();
    for i in 1..3 {
        let c_cut = rng.random_range(c_low..c_high);
        let d = &probe.destinations[i];
        let g = tradelab::model::interior_solution(&probe, d, &firm, c_cut).unwrap().gross_profit;
        params.destinations[i].fixed_cost = g;
    }
    let family = if rng.random_bool(0.5) {
        Family::Uniform
    } else {
        Family::TruncatedLogNormal {
            mu: rng.random_range(-0.2..0.4),
            sigma: rng.random_range(0.2..0.8),
        }
    };
    let market = SupplierMarket::new(family, c_low, c_high, 0.0).unwrap();
    (validate_params(params).unwrap(), firm, market)
}
