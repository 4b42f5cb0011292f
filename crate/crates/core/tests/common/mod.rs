#![allow(dead_code)]

use std::fmt::Write as _;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const DEALS_XML: &str = include_str!("../fixtures/deals-experiment.xml");

/// Purchase records shaped like the deals data: young men and young card
/// payers tend to come back.
pub fn deals_arff(n: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::from(
        "@relation deals\n\n@attribute Gender {male,female}\n@attribute Age numeric\n\
         @attribute 'Payment Method' {'credit card',cash,cheque}\n@attribute 'Future Customer' {no,yes}\n\n@data\n",
    );
    for _ in 0..n {
        let male = rng.random_bool(0.5);
        let age: u32 = rng.random_range(18..70);
        let payment = ["'credit card'", "cash", "cheque"][rng.random_range(0..3)];
        let likely = (male && age < 35) || (payment == "'credit card'" && age < 31);
        let yes = if likely { rng.random_bool(0.95) } else { rng.random_bool(0.25) };
        let _ = writeln!(
            out,
            "{},{age},{payment},{}",
            if male { "male" } else { "female" },
            if yes { "yes" } else { "no" }
        );
    }
    out
}

/// Two populations with exponential survival times: `group = a` dies fast.
pub fn survival_arff(n: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::from(
        "@relation survival\n\n@attribute group {a,b}\n@attribute noise numeric\n\
         @attribute time numeric\n@attribute status {0,1}\n\n@data\n",
    );
    for i in 0..n {
        let fast = i % 2 == 0;
        let rate: f64 = if fast { 1.0 } else { 0.1 };
        let u: f64 = rng.random_range(0.0001..1.0);
        let t = -u.ln() / rate;
        let censored = rng.random_bool(0.15);
        let noise: f64 = rng.random_range(0.0..10.0);
        let _ = writeln!(
            out,
            "{},{noise:.3},{t:.4},{}",
            if fast { "a" } else { "b" },
            u8::from(!censored)
        );
    }
    out
}

/// Report text with the timing lines dropped.
pub fn mask_timings(report: &str) -> String {
    report
        .lines()
        .filter(|l| !l.starts_with("time_"))
        .collect::<Vec<_>>()
        .join("\n")
}
