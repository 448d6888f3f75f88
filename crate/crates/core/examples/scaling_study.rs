//! Return mixing time against the switching period of passive rooms.

use polymix::harness::{mixing_scaling_study, Axis, StudySpec};

fn main() -> polymix::Result<()> {
    let spec = StudySpec {
        axis: Axis::Tau,
        points: vec![10.0, 20.0, 30.0, 40.0],
        seeds: vec![0, 1],
        ..StudySpec::default()
    };
    let study = mixing_scaling_study(&spec)?;
    for p in &study.points {
        println!("tau = {:3}  |S| = {:4}  t_ret = {:7.1}", p.axis_value, p.n_states, p.value);
    }
    let fit = &study.fits[0];
    println!("linear fit: slope {:.3}, R² {:.3}", fit.linear.slope, fit.linear.r2);
    Ok(())
}
