use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::exponent::{format_ratio, rat, Exponent, Kappa, LebesguePair};

/// Time exponents `q, q'` paired with a decay rate through
/// `1/q - 1/q' = 1 - kappa`, `1/q + 1/q' = 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrichartzExponents {
    pub space: LebesguePair,
    pub kappa: Kappa,
    pub q: Option<String>,
    pub q_prime: Option<String>,
    pub admissible: bool,
}

pub fn strichartz_pair(space: LebesguePair, kappa: Kappa) -> StrichartzExponents {
    let inadmissible = StrichartzExponents {
        space,
        kappa,
        q: None,
        q_prime: None,
        admissible: false,
    };
    let Kappa::Finite(k) = kappa else {
        return inadmissible;
    };
    if k <= Exponent::zero() || k >= Exponent::one() {
        return inadmissible;
    }
    let inv_q = Exponent::one() - k / 2;
    let inv_q_prime = k / 2;
    StrichartzExponents {
        space,
        kappa,
        q: Some(format_ratio(&inv_q.recip())),
        q_prime: Some(format_ratio(&inv_q_prime.recip())),
        admissible: inv_q > rat(1, 2) && inv_q < Exponent::one(),
    }
}
