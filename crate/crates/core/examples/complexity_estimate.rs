//! Operation counts predicted for the tensor and quadrature approaches.

use formc::bench::{flop_estimates, ComplexityParams};
use formc::cases::TestCase;

fn main() {
    for case in TestCase::ALL {
        for d in [2, 3] {
            let ratios: Vec<String> = (1..=6)
                .map(|q| format!("{:7.2}", flop_estimates(ComplexityParams::for_case(case, q, d)).ratio))
                .collect();
            println!("{:<14} {d}D  T_Q/T_T for q = 1..6: {}", case.name(), ratios.join(""));
        }
    }
}
