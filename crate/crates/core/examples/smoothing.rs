//! Smooths a planned path with B-splines of increasing degree and shows the
//! validated result.

use cogmap::cli::train_for;
use cogmap::planner::{plan, smooth, smooth_validated, SearchAlgorithm};
use cogmap::scenario::Scenario;

fn main() -> cogmap::Result<()> {
    let sc = Scenario::pillar();
    let (net, lut) = train_for(&sc)?;
    let occupied = sc.occupied_at(0.0);
    let blocked = lut.blocked_neurons(&occupied)?;
    let path = plan(
        &net,
        &lut,
        &sc.robot,
        &sc.start,
        &sc.goal,
        &occupied,
        SearchAlgorithm::Dijkstra,
    )?;
    println!("polyline: {:.4} rad", path.cspace_length());
    for degree in 1..=4 {
        let t = smooth(&path, degree, 10)?;
        let bad = t
            .samples
            .iter()
            .filter(|q| blocked.contains(net.best_matching_unit(q).expect("same dimension")))
            .count();
        println!(
            "degree {degree}: {:.4} rad, {bad} samples on blocked neurons",
            t.cspace_length()
        );
    }
    let best = smooth_validated(&path, &net, &blocked, 4, 10)?;
    println!("validated: degree {}, {} samples", best.degree, best.len());
    Ok(())
}
