//! Richardson extrapolation of the splitting's time order on the stirred
//! condensate: for N = 2^k steps over T = 0.1, three runs at 2dt, dt, dt/2
//! give m = log2 of the ratio of successive H¹_h differences. The measured
//! order tends to 1 for the Lie splitting and 2 for Strang.

use gpfv::harness::{time_order_sweep, OrderReport, Scenario};
use gpfv::solver::Scheme;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let t_final = 0.1;

    println!("Lie splitting, T = {t_final}, omega = 1:");
    println!("k,{}", OrderReport::csv_header());
    let scenario = Scenario::paper_disk(1.0);
    for (k, report) in (5u32..).zip(time_order_sweep(&scenario, t_final, 5..=10)?) {
        println!("{k},{}", report.csv_row());
    }

    println!("\nStrang splitting, same setup:");
    println!("k,{}", OrderReport::csv_header());
    let mut strang = Scenario::paper_disk(1.0);
    strang.scheme = Scheme::Strang;
    for (k, report) in (6u32..).zip(time_order_sweep(&strang, t_final, 6..=8)?) {
        println!("{k},{}", report.csv_row());
    }
    Ok(())
}
