use std::fmt::Write;

use crate::document::prototype::PAINT_ORDER;
use crate::engine::{defaults, ElementState, SpawnKind, SpawnedElement};

use super::{ExportElement, ExportScene};

/// Fixed-precision number text: at most 6 decimals, no trailing zeros.
pub fn num(x: f64) -> String {
    let mut s = format!("{x:.6}");
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    if s == "-0" {
        s = "0".into();
    }
    s
}

pub fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

fn transform_attr(s: &ElementState) -> String {
    let t = &s.transform;
    let sx = if t.flip_h { -t.scale_x } else { t.scale_x };
    let sy = if t.flip_v { -t.scale_y } else { t.scale_y };
    format!(
        "translate({} {}) rotate({}) scale({} {})",
        num(t.x),
        num(t.y),
        num(t.rotation.to_degrees()),
        num(sx),
        num(sy)
    )
}

fn open_group(out: &mut String, s: &ElementState) {
    let _ = write!(
        out,
        "<g id=\"{}\" transform=\"{}\" opacity=\"{}\"",
        escape(&s.element_id),
        transform_attr(s),
        num(s.transform.opacity)
    );
    if s.transform.blur > 0.0 {
        let _ = write!(out, " filter=\"url(#blur-{})\"", escape(&s.element_id));
    }
    out.push_str(">\n");
}

fn draw_element(out: &mut String, el: &ExportElement, s: &ElementState, href_prefix: &str) {
    open_group(out, s);
    for slot in PAINT_ORDER {
        let Some(p) = el.parts.iter().find(|p| p.slot == slot) else {
            continue;
        };
        let pose = s.pose.get(&slot).copied().unwrap_or(0.0);
        let _ = writeln!(
            out,
            "<g transform=\"translate({} {}) rotate({})\"><image href=\"{}{}\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" preserveAspectRatio=\"none\"/></g>",
            num(p.offset.x),
            num(p.offset.y),
            num(pose.to_degrees()),
            href_prefix,
            escape(&p.path),
            num(-p.anchor.x * p.scale),
            num(-p.anchor.y * p.scale),
            num(p.width * p.scale),
            num(p.height * p.scale)
        );
    }
    out.push_str("</g>\n");
}

fn draw_spawned(out: &mut String, sp: &SpawnedElement, s: &ElementState) {
    open_group(out, s);
    let (w, h) = (sp.width, sp.height);
    let (hw, hh) = (w / 2.0, h / 2.0);
    match sp.kind {
        SpawnKind::SpeechBubble => {
            if let Some(tail) = sp.tail {
                let (tx, ty) = (tail.x - s.transform.x, tail.y - s.transform.y);
                let _ = writeln!(
                    out,
                    "<path d=\"M {} {} L {} {} L {} {} Z\" fill=\"#ffffff\" stroke=\"#222222\" stroke-width=\"2\"/>",
                    num(-10.0),
                    num(hh - 1.0),
                    num(tx),
                    num(ty),
                    num(10.0),
                    num(hh - 1.0)
                );
            }
            let _ = writeln!(
                out,
                "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" rx=\"12\" fill=\"#ffffff\" stroke=\"#222222\" stroke-width=\"2\"/>",
                num(-hw),
                num(-hh),
                num(w),
                num(h)
            );
        }
        SpawnKind::ThoughtBubble => {
            if let Some(tail) = sp.tail {
                let (tx, ty) = (tail.x - s.transform.x, tail.y - s.transform.y);
                for (i, r) in [(1.0, 7.0), (2.0, 4.5)] {
                    let f = i / 3.0;
                    let _ = writeln!(
                        out,
                        "<circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"#ffffff\" stroke=\"#222222\" stroke-width=\"2\"/>",
                        num(tx * f),
                        num(hh + (ty - hh) * f),
                        num(r)
                    );
                }
            }
            let _ = writeln!(
                out,
                "<ellipse cx=\"0\" cy=\"0\" rx=\"{}\" ry=\"{}\" fill=\"#ffffff\" stroke=\"#222222\" stroke-width=\"2\" stroke-dasharray=\"14 4\"/>",
                num(hw * std::f64::consts::SQRT_2),
                num(hh * std::f64::consts::SQRT_2)
            );
        }
        SpawnKind::Text => {}
    }
    let line_h = defaults::BUBBLE_LINE_HEIGHT;
    let first = -(sp.lines.len() as f64 - 1.0) * line_h / 2.0;
    let (weight, size, fill) = match sp.kind {
        SpawnKind::Text => ("bold", defaults::BUBBLE_FONT_SIZE * 1.6, "#d62828"),
        _ => ("normal", defaults::BUBBLE_FONT_SIZE, "#111111"),
    };
    for (i, line) in sp.lines.iter().enumerate() {
        let _ = writeln!(
            out,
            "<text x=\"0\" y=\"{}\" font-family=\"sans-serif\" font-size=\"{}\" font-weight=\"{weight}\" fill=\"{fill}\" text-anchor=\"middle\" dominant-baseline=\"middle\">{}</text>",
            num(first + i as f64 * line_h),
            num(size),
            escape(line)
        );
    }
    out.push_str("</g>\n");
}

/// One frame as an SVG document. Asset hrefs are `href_prefix` + the
/// asset's library-relative path.
pub fn frame_svg(scene: &ExportScene, states: &[ElementState], href_prefix: &str) -> String {
    let (w, h) = (defaults::CANVAS_WIDTH, defaults::CANVAS_HEIGHT);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">",
        num(w),
        num(h),
        num(w),
        num(h)
    );
    let blurred: Vec<&ElementState> = states.iter().filter(|s| s.transform.blur > 0.0).collect();
    if !blurred.is_empty() {
        out.push_str("<defs>\n");
        for s in blurred {
            let _ = writeln!(
                out,
                "<filter id=\"blur-{}\" x=\"-50%\" y=\"-50%\" width=\"200%\" height=\"200%\"><feGaussianBlur stdDeviation=\"{}\"/></filter>",
                escape(&s.element_id),
                num(s.transform.blur)
            );
        }
        out.push_str("</defs>\n");
    }
    let _ = writeln!(out, "<rect width=\"{}\" height=\"{}\" fill=\"#ffffff\"/>", num(w), num(h));
    if let Some(bg) = &scene.background {
        let _ = writeln!(
            out,
            "<image href=\"{}{}\" x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" preserveAspectRatio=\"none\"/>",
            href_prefix,
            escape(&bg.path),
            num(w),
            num(h)
        );
    }
    for s in states {
        if let Some(el) = scene.elements.iter().find(|e| e.element_id == s.element_id) {
            draw_element(&mut out, el, s, href_prefix);
        } else if let Some(sp) = scene
            .clips
            .iter()
            .flat_map(|c| &c.spawned)
            .find(|sp| sp.id == s.element_id)
        {
            draw_spawned(&mut out, sp, s);
        }
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_text() {
        assert_eq!(num(1.0), "1");
        assert_eq!(num(-0.0000001), "0");
        assert_eq!(num(0.1 + 0.2), "0.3");
        assert_eq!(num(-12.5), "-12.5");
        assert_eq!(escape("a<b & \"c\""), "a&lt;b &amp; &quot;c&quot;");
    }
}
