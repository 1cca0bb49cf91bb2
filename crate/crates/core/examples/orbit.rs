//! Finds the x-directed periodic orbit and prints its six symmetric images.

use abc_orbits::integrator::flow_map;
use abc_orbits::shooting::*;

fn main() -> abc_orbits::Result<()> {
    let cfg = ShootingConfig::default();
    let res = find_critical_a(&cfg)?;
    println!("a* = {:.16}  t* = {:.16}  corner residual = {:.3e}", res.a_star, res.t_star, res.corner_residual);

    let orbit = assemble_periodic_orbit(&res, &cfg)?;
    println!("period = {:.16}  shift residual = {:.3e}", orbit.period, orbit.residual);
    let (d1, d2) = reflection_defects(&orbit, 50);
    println!("reflection defects: {d1:.3e}, {d2:.3e}");

    for o in conjugate_orbits(&orbit)? {
        let r = verify_orbit(&o, &cfg.integrator)?;
        println!("{:?}: base point {:?}, residual {r:.3e}", o.direction, o.base_point);
    }

    // growth of the deviation from exact periodicity
    for k in [1, 2, 5, 10] {
        let end = flow_map(&orbit.params, orbit.base_point, (0.0, k as f64 * orbit.period), &cfg.integrator)?;
        println!("{k:>2} periods: {:.3e}", (end - orbit.base_point.lattice_shifted([k, 0, 0])).norm());
    }
    Ok(())
}
