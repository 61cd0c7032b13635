use hilbertlab::entropy;
use hilbertlab::group::*;

fn main() {
    let f1 = triangle_reflection_family(3, 3, 4, 1.0).unwrap();
    let f2 = triangle_reflection_family(3, 3, 4, 2.0).unwrap();
    let e1 = entropy::orbit_entropy(&f1.generators, &f1.presentation, 12).unwrap();
    let e2 = entropy::orbit_entropy(&f2.generators, &f2.presentation, 12).unwrap();
    let comb = (e1.fit_stderr.powi(2) + e2.fit_stderr.powi(2)).sqrt();
    println!("s1={:.4}±{:.4} s2={:.4}±{:.4} gap={:.4} 3sig={:.4}",
        e1.value, e1.fit_stderr, e2.value, e2.fit_stderr, e1.value - e2.value, 3.0 * comb);
}
