use super::Response;
use crate::color::CvdProfile;
use crate::plates::{population_stats, IshiharaPlate, V_THRESH};

/// Model viewer: reads a glyph when the simulated difference between the mean
/// figure color of that glyph and the mean ground color reaches `V_THRESH`.
pub fn simulated_respondent(profile: CvdProfile, plate: &IshiharaPlate) -> Response {
    let stats = population_stats(plate);
    let answer: String = plate
        .glyphs
        .iter()
        .zip(&stats.figure_means)
        .filter(|(_, &figure)| {
            crate::plates::simulated_difference(figure, stats.ground_mean, profile) >= V_THRESH
        })
        .map(|(g, _)| g.digit)
        .collect();
    Response::new(plate.id.clone(), answer)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::color::Dichromat;
    use crate::plates::{compose_plate, PlateDesign, ViewerClass};

    #[test]
    fn normal_reads_vanishing_plates() {
        for target in Dichromat::ALL {
            let plate = compose_plate(PlateDesign::vanishing(target, 0.0), &['4', '2'], 13).unwrap();
            assert_eq!(simulated_respondent(CvdProfile::NORMAL, &plate).answer, "42");
            assert_eq!(simulated_respondent(target.profile(), &plate).answer, "");
        }
    }

    #[test]
    fn diagnostic_readings_split_protan_and_deutan() {
        let plate = compose_plate(PlateDesign::diagnostic(), &['3', '8'], 31).unwrap();
        let protan = simulated_respondent(Dichromat::Protan.profile(), &plate);
        let deutan = simulated_respondent(Dichromat::Deutan.profile(), &plate);
        assert_eq!(protan.answer, "8");
        assert_eq!(deutan.answer, "3");
        assert_eq!(protan.answer, plate.expected(ViewerClass::Protan));
        assert_eq!(deutan.answer, plate.expected(ViewerClass::Deutan));
    }
}
