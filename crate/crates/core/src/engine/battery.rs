use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::EngineError;
use crate::color::Dichromat;
use crate::plates::{compose_plate, DesignKind, IshiharaPlate, PlateDesign};
use crate::rng;

/// Plate counts of a battery. Each vanishing list holds one difficulty per plate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Composition {
    pub protan: Vec<f64>,
    pub deutan: Vec<f64>,
    pub tritan: Vec<f64>,
    pub diagnostic: usize,
}

const GRADED: [f64; 4] = [0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0];

impl Default for Composition {
    fn default() -> Self {
        Composition {
            protan: GRADED.to_vec(),
            deutan: GRADED.to_vec(),
            tritan: GRADED.to_vec(),
            diagnostic: 4,
        }
    }
}

impl Composition {
    pub fn validate(&self) -> Result<(), EngineError> {
        let bad = |msg: &str| Err(EngineError::Composition(msg.to_string()));
        if self.protan.len() + self.deutan.len() < 6 {
            return bad("at least 6 red-green vanishing plates are required");
        }
        if self.protan.is_empty() || self.deutan.is_empty() {
            return bad("both protan and deutan vanishing plates are required");
        }
        if self.tritan.len() < 3 {
            return bad("at least 3 tritan vanishing plates are required");
        }
        if self.diagnostic < 3 {
            return bad("at least 3 diagnostic plates are required");
        }
        let all = self.protan.iter().chain(&self.deutan).chain(&self.tritan);
        if all.clone().any(|d| !(0.0..=1.0).contains(d)) {
            return bad("difficulties must lie in [0, 1]");
        }
        Ok(())
    }

    pub fn plate_count(&self) -> usize {
        1 + self.protan.len() + self.deutan.len() + self.tritan.len() + self.diagnostic
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Battery {
    pub id: String,
    pub seed: u64,
    pub composition: Composition,
    pub plates: Vec<IshiharaPlate>,
}

impl Battery {
    pub fn plate(&self, id: &str) -> Option<&IshiharaPlate> {
        self.plates.iter().find(|p| p.id == id)
    }

    pub fn plate_ids(&self) -> Vec<String> {
        self.plates.iter().map(|p| p.id.clone()).collect()
    }

    /// Checks the structural invariants of a loaded battery.
    pub fn validate(&self) -> Result<(), EngineError> {
        self.composition.validate()?;
        let count = |kind: DesignKind, target: Option<Dichromat>| {
            self.plates
                .iter()
                .filter(|p| p.design.kind == kind && (target.is_none() || p.design.target == target))
                .count()
        };
        let c = &self.composition;
        let matches = self.plates.first().map(|p| p.design.kind) == Some(DesignKind::Demo)
            && count(DesignKind::Demo, None) == 1
            && count(DesignKind::Vanishing, Some(Dichromat::Protan)) == c.protan.len()
            && count(DesignKind::Vanishing, Some(Dichromat::Deutan)) == c.deutan.len()
            && count(DesignKind::Vanishing, Some(Dichromat::Tritan)) == c.tritan.len()
            && count(DesignKind::Diagnostic, None) == c.diagnostic
            && self.plates.len() == c.plate_count();
        if !matches {
            return Err(EngineError::Composition(
                "plates do not match the declared composition".into(),
            ));
        }
        let mut ids = self.plate_ids();
        ids.sort();
        ids.dedup();
        if ids.len() != self.plates.len() {
            return Err(EngineError::Composition("duplicate plate ids".into()));
        }
        Ok(())
    }
}

fn random_digits(rng: &mut rng::PlateRng, count: usize) -> Vec<char> {
    let mut digits: Vec<char> = Vec::with_capacity(count);
    while digits.len() < count {
        // leading zeros read ambiguously; diagnostic digits must differ
        let low = if digits.is_empty() { 1 } else { 0 };
        let d = char::from_digit(rng.random_range(low..10), 10).unwrap();
        if !digits.contains(&d) {
            digits.push(d);
        }
    }
    digits
}

/// Demo plate first, then the vanishing and diagnostic plates in a seeded
/// shuffle. Plate seeds and digits all derive from `seed`.
pub fn create_battery(seed: u64, composition: Option<Composition>) -> Result<Battery, EngineError> {
    let composition = composition.unwrap_or_default();
    composition.validate()?;
    let mut rng = rng::seeded(seed);
    let mut designs: Vec<PlateDesign> = Vec::new();
    for (target, difficulties) in [
        (Dichromat::Protan, &composition.protan),
        (Dichromat::Deutan, &composition.deutan),
        (Dichromat::Tritan, &composition.tritan),
    ] {
        designs.extend(difficulties.iter().map(|&d| PlateDesign::vanishing(target, d)));
    }
    designs.extend((0..composition.diagnostic).map(|_| PlateDesign::diagnostic()));
    designs.shuffle(&mut rng);
    designs.insert(0, PlateDesign::demo());

    let id = format!("battery-{seed:016x}");
    let mut plates = Vec::with_capacity(designs.len());
    for (index, design) in designs.into_iter().enumerate() {
        let count = match design.kind {
            DesignKind::Diagnostic => 2,
            _ => rng.random_range(1..=2),
        };
        let digits = random_digits(&mut rng, count);
        let mut plate = compose_plate(design, &digits, rng::derive_seed(seed, index as u64))?;
        plate.id = format!("{id}-p{index:02}");
        plates.push(plate);
    }
    Ok(Battery {
        id,
        seed,
        composition,
        plates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_battery_layout() {
        let battery = create_battery(1, None).unwrap();
        assert_eq!(battery.plates.len(), 17);
        assert_eq!(battery.plates[0].design.kind, DesignKind::Demo);
        battery.validate().unwrap();
    }

    #[test]
    fn overrides_are_checked() {
        let too_few = Composition {
            tritan: vec![0.0, 1.0],
            ..Default::default()
        };
        assert!(matches!(create_battery(1, Some(too_few)), Err(EngineError::Composition(_))));
        let small = Composition {
            protan: vec![0.0, 0.5, 1.0],
            deutan: vec![0.0, 0.5, 1.0],
            tritan: vec![0.0, 0.5, 1.0],
            diagnostic: 3,
        };
        assert_eq!(create_battery(2, Some(small)).unwrap().plates.len(), 13);
    }
}
