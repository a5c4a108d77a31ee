//! Tour of the discovery-probability families: per-play probabilities,
//! non-discovery products (with closed forms where they exist), and the
//! divergence classification that decides learnability.

use mdpu::DiscoveryFamily;

fn main() {
    let families = [
        ("constant(0.5)", DiscoveryFamily::Constant { c: 0.5 }),
        ("power(2)", DiscoveryFamily::Power { alpha: 2.0 }),
        ("power(1)", DiscoveryFamily::Power { alpha: 1.0 }),
        ("harmonic_j", DiscoveryFamily::HarmonicJ),
        ("log_harmonic(1)", DiscoveryFamily::LogHarmonic { m1: 1.0 }),
        (
            "table[.5 .25 .125]",
            DiscoveryFamily::Table {
                values: vec![0.5, 0.25, 0.125],
            },
        ),
    ];

    for (name, fam) in &families {
        println!("{name}:");
        let probs: Vec<String> = (1..=5).map(|t| format!("{:.4}", fam.prob(1, t))).collect();
        println!("  D(1, t) for t = 1..5: {}", probs.join(" "));
        println!("  divergence: {:?}", fam.divergence_class());
        let p = fam.nondiscovery_product(1, 10);
        println!("  P(no discovery in 10 plays, 1 hidden) = {:.6}", p.value);
    }

    println!();
    println!("power(2) has the closed form (t+2)/(2(t+1)):");
    for t in [1u64, 10, 100, 10_000] {
        let fam = DiscoveryFamily::Power { alpha: 2.0 };
        let got = fam.nondiscovery_product(1, t).value;
        let closed = (t as f64 + 2.0) / (2.0 * (t as f64 + 1.0));
        println!("  t = {t}: product = {got:.10}, closed form = {closed:.10}");
    }

    println!();
    println!("harmonic_j has the closed form j/(t+j):");
    let fam = DiscoveryFamily::HarmonicJ;
    for (j, t) in [(1u64, 9u64), (3, 7), (5, 45)] {
        let got = fam.nondiscovery_product(j, t).value;
        println!(
            "  j = {j}, t = {t}: product = {got:.10}, closed form = {:.10}",
            j as f64 / (t + j) as f64
        );
    }
}
