//! Item characteristic curves with and without zero inflation.
//!
//! Prints the 3PL success probability and the zero-inflated success
//! probability for one item across abilities, for a neurotypical learner
//! and for learners with each condition, under every delivery.

use zilm::domain::{Content, Delivery, Item, NdcProfile, Response, StudentProfile, Subject};
use zilm::models::zilm_success_prob;
use zilm::simulate::{irt3pl_prob, true_lqf_pi, LqfWeights};

fn main() -> zilm::Result<()> {
    let w = LqfWeights::default();
    let item = Item {
        id: 0,
        difficulty: 0.0,
        discrimination: 1.5,
        guessing: 0.1,
        subject: Subject::Maths,
        content: Content::Both,
        density: 0.6,
        delivery: Delivery::Read,
        response: Response::Written,
    };
    let profiles = [
        ("nt", NdcProfile::NT),
        ("dyslexia", NdcProfile::new(true, false, false)),
        ("dyscalculia", NdcProfile::new(false, true, false)),
        ("spd", NdcProfile::new(false, false, true)),
    ];

    for delivery in Delivery::ALL {
        let it = Item { delivery, ..item.clone() };
        println!("\ndelivery = {}", delivery.token());
        print!("{:>6} {:>7}", "θ", "3pl");
        for (name, _) in &profiles {
            print!(" {name:>12}");
        }
        println!();
        for k in -6..=6 {
            let theta = f64::from(k) * 0.5;
            let p = irt3pl_prob(theta, &it);
            print!("{theta:>6.1} {p:>7.3}");
            for (_, ndc) in &profiles {
                let s = StudentProfile { id: 0, ability: theta, ndc: *ndc };
                let pi = true_lqf_pi(&s, &it, &w);
                print!(" {:>12.3}", zilm_success_prob(pi, p)?);
            }
            println!();
        }
    }
    Ok(())
}
