//! Named polynomials used by the tests, the CLI fixtures and the acceptance suite.

use crate::coeff::Coefficient;
use crate::error::Result;
use crate::poly::{Domain, Polynomial};

#[derive(Clone, Copy, Debug)]
pub struct Fixture {
    pub name: &'static str,
    pub den: &'static str,
    pub domain: Domain,
    /// Boundary zero analysed by default.
    pub center: [i64; 2],
}

impl Fixture {
    pub fn poly(&self) -> Polynomial {
        Polynomial::parse2(self.den).expect("corpus polynomial parses")
    }

    pub fn center(&self) -> Vec<Coefficient> {
        self.center.iter().map(|&c| Coefficient::int(c)).collect()
    }

    /// The polynomial in the half-plane chart with the boundary zero at the origin.
    pub fn at_origin(&self) -> Result<Polynomial> {
        let p = self.poly();
        match self.domain {
            Domain::UpperHalfPlane => Ok(p.shift(&self.center())),
            Domain::Disk => crate::integrability::cayley_at(&p, &self.center(), &p.multidegree()),
        }
    }
}

pub const LINE_UHP: Fixture = Fixture { name: "line_uhp", den: "z1 + z2 - 2*i*z1*z2", domain: Domain::UpperHalfPlane, center: [0, 0] };
pub const TWO_BRANCH: Fixture = Fixture { name: "two_branch", den: "4 - 3*z1 - 3*z2 + z1^2*z2 + z1*z2^2", domain: Domain::Disk, center: [1, 1] };
pub const CONTACT_SIX: Fixture = Fixture {
    name: "contact_six",
    den: "z1 + z2 - 2*z1^3 - 6*z1^2*z2 - i*(z1^2 + z1*z2 - 4*z1^3*z2)",
    domain: Domain::UpperHalfPlane,
    center: [0, 0],
};
pub const RIF_LINE: Fixture = Fixture { name: "rif_line", den: "2 - z1 - z2", domain: Domain::Disk, center: [1, 1] };
pub const CONTACT_FOUR: Fixture = Fixture { name: "contact_four", den: "4 - 3*z1 - z2 - z1*z2 + z1^2", domain: Domain::Disk, center: [1, 1] };
pub const TWO_ZEROS: Fixture = Fixture { name: "two_zeros", den: "4 - z2 + z1*z2 - 3*z1^2*z2 - z1^3*z2", domain: Domain::Disk, center: [-1, 1] };

pub const ALL: [Fixture; 6] = [LINE_UHP, TWO_BRANCH, CONTACT_SIX, RIF_LINE, CONTACT_FOUR, TWO_ZEROS];

/// Numerator of `(z1 - 1)(z2 - 1) / (2 - z1 - z2)`.
pub const RIF_LINE_NUMERATOR: &str = "(z1 - 1)*(z2 - 1)";

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_vanish_at_their_centers() {
        for f in ALL {
            let p = f.poly();
            assert!(p.eval(&f.center()).is_zero(), "{}", f.name);
            let q = f.at_origin().unwrap();
            assert!(q.coeff(&[0, 0]).is_zero(), "{}", f.name);
        }
    }
}
