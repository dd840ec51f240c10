//! Built-in systems: the standard carpet and the 104-map counterexample.

use crate::error::{Error, Result};
use crate::exactnum::QuadNumber;
use crate::geometry::{IFSystem, Isometry, Similarity, Square};

pub struct CatalogEntry {
    pub name: &'static str,
    pub description: &'static str,
    pub build: fn() -> IFSystem,
}

pub const CATALOG: &[CatalogEntry] = &[
    CatalogEntry {
        name: "sc8",
        description: "standard Sierpinski carpet: 8 maps of ratio 1/3, centre removed",
        build: sc8,
    },
    CatalogEntry {
        name: "carpet104",
        description: "104 homotheties with ratios a, a^2 and 1/4, a = sqrt(7/24) - 1/2; \
                      corner cells weakly attached to the inner cells",
        build: carpet104,
    },
];

/// Radicand of the field containing every coordinate of `carpet104`.
pub const CARPET104_RADICAND: u64 = 42;

pub fn build(name: &str) -> Result<IFSystem> {
    CATALOG
        .iter()
        .find(|e| e.name == name)
        .map(|e| (e.build)())
        .ok_or_else(|| Error::UnknownSystem(name.to_string()))
}

pub fn sc8() -> IFSystem {
    let third = QuadNumber::rational(1, 3);
    let mut maps = Vec::with_capacity(8);
    for j in 0..3 {
        for i in 0..3 {
            if i == 1 && j == 1 {
                continue;
            }
            maps.push(Similarity::new(
                third.clone(),
                QuadNumber::rational(i, 3),
                QuadNumber::rational(j, 3),
            ));
        }
    }
    IFSystem::new("sc8", 0, 3, maps).expect("sc8 is well formed")
}

/// `a = √(7/24) - 1/2 = (-6 + √42)/12`, the positive root of `6(a² + a) = 1/4`.
pub fn carpet104_a() -> QuadNumber {
    QuadNumber::parse("(-6+1r)/12", CARPET104_RADICAND).expect("literal")
}

pub fn carpet104() -> IFSystem {
    let a = carpet104_a();
    let a2 = &a * &a;
    let quarter = QuadNumber::rational(1, 4);
    let zero = QuadNumber::zero();

    // F_1..F_13 along the bottom-left quarter
    let mut maps: Vec<Similarity> = Vec::with_capacity(104);
    for j in 0..=5 {
        let shift = QuadNumber::rational(j, 24);
        maps.push(Similarity::new(a.clone(), shift.clone(), zero.clone()));
        maps.push(Similarity::new(a2.clone(), &a + &shift, zero.clone()));
    }
    maps.push(Similarity::new(quarter.clone(), quarter.clone(), zero.clone()));

    // F_i = Γ_h ∘ F_{27-i} ∘ Γ_h for 14 <= i <= 26
    for i in 14..=26 {
        let m = maps[27 - i - 1]
            .conjugated(Isometry::H, Isometry::H)
            .expect("reflection conjugate is a homothety");
        maps.push(m);
    }

    // F_{i+25j} = Γ_{r_j} ∘ F_i ∘ Γ_{r_{4-j}}; index 26 is already defined by
    // reflection and coincides with the rotation rule
    let rotations = [Isometry::R1, Isometry::R2, Isometry::R3];
    let mut rotated: Vec<Option<Similarity>> = vec![None; 100];
    for (i, m) in maps.iter().enumerate().take(25) {
        for (jm1, r) in rotations.iter().enumerate() {
            let idx = i + 25 * (jm1 + 1);
            rotated[idx] = Some(
                m.conjugated(*r, r.inverse())
                    .expect("rotation conjugate is a homothety"),
            );
        }
    }
    maps.truncate(26);
    for slot in rotated.into_iter().skip(26) {
        maps.push(slot.expect("every index 27..=100 is produced by a rotation"));
    }

    let centre = [(1, 1), (2, 1), (2, 2), (1, 2)];
    for (cx, cy) in centre {
        maps.push(Similarity::new(
            quarter.clone(),
            QuadNumber::rational(cx, 4),
            QuadNumber::rational(cy, 4),
        ));
    }
    debug_assert_eq!(maps.len(), 104);
    IFSystem::new("carpet104", CARPET104_RADICAND, 24, maps).expect("carpet104 is well formed")
}

/// The 1-based indices of the eight quarter cells forming the horizontal
/// middle strip `[0,1] × [1/4, 3/4]` of `carpet104`.
pub const CARPET104_STRIP: [usize; 8] = [38, 39, 88, 89, 101, 102, 103, 104];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConjugationCheck {
    pub description: String,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuditReport {
    pub checks: Vec<ConjugationCheck>,
    /// Pairs of distinct indices defining the same square.
    pub duplicate_squares: Vec<(usize, usize)>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.holds) && self.duplicate_squares.is_empty()
    }
}

/// Cross-checks overlapping definition rules and square uniqueness.
///
/// For every map and every isometry `Γ`, the exact composition
/// `Γ ∘ F_i ∘ Γ⁻¹` must itself be a map of the system. For `carpet104` the
/// corner identity `Γ_{r1} ∘ F_1 ∘ Γ_{r3} = F_26 = Γ_h ∘ F_1 ∘ Γ_h` is
/// checked explicitly.
pub fn consistency_audit(sys: &IFSystem) -> AuditReport {
    let mut checks = Vec::new();
    if sys.name == "carpet104" && sys.len() == 104 {
        let f1 = &sys.maps[0];
        let rot = f1.conjugated(Isometry::R1, Isometry::R3);
        let refl = f1.conjugated(Isometry::H, Isometry::H);
        let f26 = &sys.maps[25];
        checks.push(ConjugationCheck {
            description: "r1 o F_1 o r3 = F_26".into(),
            holds: rot.as_ref() == Some(f26),
        });
        checks.push(ConjugationCheck {
            description: "h o F_1 o h = F_26".into(),
            holds: refl.as_ref() == Some(f26),
        });
    }
    for g in Isometry::ALL {
        let closed = sys.maps.iter().all(|m| {
            m.conjugated(g, g.inverse())
                .map(|c| sys.maps.contains(&c))
                .unwrap_or(false)
        });
        checks.push(ConjugationCheck {
            description: format!("{g} o F_i o {g}^-1 is a map of the system for every i"),
            holds: closed,
        });
    }
    let squares: Vec<Square> = sys.squares();
    let mut duplicate_squares = Vec::new();
    let mut seen = std::collections::HashMap::new();
    for (i, sq) in squares.iter().enumerate() {
        if let Some(&j) = seen.get(sq) {
            duplicate_squares.push((j + 1, i + 1));
        } else {
            seen.insert(sq, i);
        }
    }
    AuditReport {
        checks,
        duplicate_squares,
    }
}
