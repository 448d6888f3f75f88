//! Build every environment family and round-trip one through the text format.

use polymix::envs::{build, EnvParams, Family, RoomKind};
use polymix::mdp::{read_mdp, write_mdp, MdpLayout};

fn main() -> polymix::Result<()> {
    let p = |d, n, tau, n_tasks| EnvParams {
        d: Some(d),
        n_rooms: Some(n),
        kind: Some(RoomKind::Random),
        c: Some(2.0),
        x: Some(1.0),
        tau: Some(tau),
        n_tasks: Some(n_tasks),
        dim: Some(4),
        ..EnvParams::default()
    };
    for family in Family::ALL {
        let env = build(family, &p(3, 3, 20, 3), 0)?;
        println!(
            "{:40} |S| = {:5}  |A| = {}  tasks = {}  rho* = {:.4}",
            env.id(),
            env.n_states(),
            env.n_actions(),
            env.n_tasks,
            env.rho_star()?
        );
    }

    let env = build(Family::GoalGrid, &p(3, 2, 1, 1), 7)?;
    let text = write_mdp(&env.mdp, MdpLayout::Sparse);
    let back = read_mdp(&text)?;
    assert_eq!(write_mdp(&back, MdpLayout::Sparse), text);
    println!("\n{}", text.lines().take(12).collect::<Vec<_>>().join("\n"));
    Ok(())
}
