//! Generates reach trajectories for the three-link wrist scenario and writes
//! them in the text dataset format.

use cogmap::datagen::generate_pick_place;
use cogmap::scenario::Scenario;

fn main() -> cogmap::Result<()> {
    let sc = Scenario::wrist();
    let dg = sc.datagen.as_ref().expect("wrist ships a datagen section");
    let data = generate_pick_place(&sc.robot, &sc.grid, &dg.regions, 40, 7)?;
    let out = std::env::temp_dir().join("wrist_reach.txt");
    data.save(&out)?;
    println!("{} samples -> {}", data.sample_count(), out.display());
    // the wrist joint is the same in every region, so it never moves
    let wrist: Vec<f64> = data.samples().map(|q| q[2]).collect();
    let spread =
        wrist.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - wrist.iter().cloned().fold(f64::INFINITY, f64::min);
    println!("wrist joint spread: {spread}");
    Ok(())
}
