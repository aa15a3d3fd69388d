use std::fmt::Write;

use super::IshiharaPlate;

const BACKGROUND: &str = "#808080";

/// Standalone SVG: a neutral background and one `<circle>` per dot. Carries no
/// text, ids or metadata, so the answer cannot be read from the markup.
pub fn render_svg(plate: &IshiharaPlate) -> String {
    let mut out = String::with_capacity(64 * plate.circles.len() + 256);
    out.push_str(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"-1.05 -1.05 2.1 2.1\" \
         width=\"640\" height=\"640\">\n",
    );
    let _ = writeln!(
        out,
        "<rect x=\"-1.05\" y=\"-1.05\" width=\"2.1\" height=\"2.1\" fill=\"{BACKGROUND}\"/>"
    );
    for c in &plate.circles {
        let _ = writeln!(
            out,
            "<circle cx=\"{:.5}\" cy=\"{:.5}\" r=\"{:.5}\" fill=\"{}\"/>",
            c.cx,
            c.cy,
            c.radius,
            c.color.to_hex()
        );
    }
    out.push_str("</svg>\n");
    out
}
