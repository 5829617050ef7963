//! The set of desirable classifiers is not convex: two members whose
//! midpoint is not a member, for ℓ1 and for ℓ2 costs.

use stratcls::design_audit::{nonconvexity_witness, WitnessCase};

fn main() {
    for case in [WitnessCase::L1, WitnessCase::Lp] {
        let w = nonconvexity_witness(case);
        println!("{case} (p = {}, β = {:?})", w.p, w.beta);
        println!("  z1  = {:?}", w.z_first);
        println!("  z2  = {:?}", w.z_second);
        println!("  mid = {:?}", w.midpoint);
        println!("  memberships = {:?}  ({})", w.memberships, w.notes);
    }
}
