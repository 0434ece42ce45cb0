//! Runs RRT, RRT-Connect and PRM on the pillar scenario.

use std::time::Instant;

use cogmap::baselines::{prm, rrt, rrt_connect, SamplerParams, VoxelValidity};
use cogmap::planner::polyline_length;
use cogmap::scenario::Scenario;

fn main() -> cogmap::Result<()> {
    let sc = Scenario::pillar();
    let occupied = sc.occupied_at(0.0);
    let v = VoxelValidity {
        model: &sc.robot,
        grid: &sc.grid,
        occupied: &occupied,
    };
    for seed in 0..3 {
        let p = SamplerParams { seed, ..sc.sampler };
        for (name, f) in [
            ("rrt", rrt as fn(_, _, _, _) -> _),
            ("rrt-connect", rrt_connect),
            ("prm", prm),
        ] {
            let t = Instant::now();
            let res = f(&sc.start, &sc.goal, &v, &p)?;
            let ms = t.elapsed().as_secs_f64() * 1e3;
            match res.path {
                Some(path) => println!("seed {seed} {name:<11} {ms:8.2} ms  {:.3} rad", polyline_length(&path)),
                None => println!("seed {seed} {name:<11} {ms:8.2} ms  no path"),
            }
        }
    }
    Ok(())
}
