//! Extensions of the unit round S² horizon whose ADM masses decrease to the
//! Penrose bound 1/2.

use horizonforge::bartnik::{dyadic_epsilons, masses_csv, minimizing_sequence};
use horizonforge::{profiles, Result};

fn main() -> Result<()> {
    let horizon = profiles::round(2, 1.0, 2048)?;
    let start = std::time::Instant::now();
    let seq = minimizing_sequence(&horizon, &dyadic_epsilons(12))?;
    print!("{}", masses_csv(&seq));
    let last = &seq[seq.len() - 1];
    println!(
        "\nm_12 - 1/2 = {:.3e}, Penrose bound {:.12}, {:.1} s",
        last.mass - 0.5,
        last.checks.penrose_bound,
        start.elapsed().as_secs_f64()
    );
    Ok(())
}
