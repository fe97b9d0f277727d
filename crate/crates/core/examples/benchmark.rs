//! Time element tensor evaluation by tensor contraction and by quadrature.
//!
//! Run with `--release`. Set FORMC_SEED to change the random cells.

use formc::bench::{format_tsv, run_benchmark, seed_from_env, BenchConfig};
use formc::cases::TestCase;
use formc::reference::Shape;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let case: TestCase = std::env::args().nth(1).as_deref().unwrap_or("mass").parse()?;
    let config = BenchConfig { degrees: vec![1, 2, 3], seed: seed_from_env(), ..BenchConfig::default() };
    let results = run_benchmark(&case.form(Shape::Triangle, 1)?, &config)?;
    print!("{}", format_tsv(&results));
    Ok(())
}
