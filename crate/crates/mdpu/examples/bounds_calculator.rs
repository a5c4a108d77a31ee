//! The sample-complexity side of the library: visit thresholds, explore
//! thresholds, exploitation lengths, the impossibility gap, and the
//! lower bound on learning time.

use mdpu::{
    impossibility_gap, k0, k1_rmax, k1_urmax, k2_k3, lower_bound_steps, DiscoveryFamily,
    GrowthBound,
};

fn main() {
    println!("visit thresholds at desk scale (2 states, 2 actions, T = 1, Rmax = 1, eps = 1, delta = 0.25):");
    println!(
        "  K1 (fully aware) = {}",
        k1_rmax(2, 2, 1, 1.0, 1.0, 0.25).unwrap()
    );
    println!(
        "  K1 (unawareness) = {}",
        k1_urmax(2, 2, 1, 1.0, 1.0, 0.25).unwrap()
    );

    println!();
    println!("explore thresholds K0 (plays needed before giving up on hidden actions):");
    let constant = DiscoveryFamily::Constant { c: 0.5 };
    println!(
        "  constant(0.5), N = 4, delta = 0.1: {}",
        k0(&constant, 4, 0.1).unwrap()
    );
    let power1 = DiscoveryFamily::Power { alpha: 1.0 };
    for delta in [0.2, 0.1, 0.05] {
        println!(
            "  power(1), N = 1, delta = {delta}: {}",
            k0(&power1, 1, delta).unwrap()
        );
    }
    let power2 = DiscoveryFamily::Power { alpha: 2.0 };
    println!(
        "  power(2), N = 1, delta = 0.5: {} (total mass is finite)",
        k0(&power2, 1, 0.5).unwrap()
    );

    println!();
    println!("exploitation lengths for the two-state hidden scenario's declared knowledge:");
    let k0v = k0(&constant, 2, 0.1).unwrap();
    let (k2, k3) = k2_k3(2, 4, 3, 2.0, 0.1, 0.1, &k0v).unwrap();
    println!("  K0 = {k0v}, K2 = {k2}, K3 = {k3}");
    println!("  (formula values are astronomically large by design; runs use overrides)");

    println!();
    println!("impossibility gap for power(2) with rewards 1 and 2:");
    let gap = impossibility_gap(&power2, 1.0, 2.0).unwrap();
    println!(
        "  sup D = {}, total mass = {:.6}, never-discover floor d = {:.6}, gap = {:.6}",
        gap.c1, gap.total_mass, gap.d, gap.gap
    );

    println!();
    println!("lower bound on steps when partial sums grow like ln(T) + 1 (c = 0.5, delta = 0.1):");
    let f = GrowthBound::Log {
        m1: 1.0,
        shift: 0.0,
        m2: 1.0,
    };
    println!("  T >= {}", lower_bound_steps(&f, 0.5, 0.1).unwrap());
}
