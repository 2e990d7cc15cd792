//! Space-time diagrams: rows are time steps flowing downwards, columns are
//! lattice sites. Defects, the three signal species and the stack heights
//! get distinct glyphs/colors; data-error bits shade the background.

use repdec_core::lattice::DecoderState;
use repdec_core::signal::Trace;

use crate::config::CliError;
use crate::records::TraceFile;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Ppm,
    Svg,
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "text" | "txt" => Ok(Format::Text),
            "ppm" => Ok(Format::Ppm),
            "svg" => Ok(Format::Svg),
            other => Err(format!("unknown format '{other}' (text, ppm, svg)")),
        }
    }
}

const COLOR_EMPTY: [u8; 3] = [255, 255, 255];
const COLOR_DATA: [u8; 3] = [214, 214, 214];
const COLOR_DEFECT: [u8; 3] = [0, 0, 0];
const COLOR_FORWARD: [u8; 3] = [214, 40, 40];
const COLOR_BACKWARD: [u8; 3] = [50, 90, 220];
const COLOR_ANTI: [u8; 3] = [40, 170, 70];

fn stack_color(height: u16) -> [u8; 3] {
    let h = height.min(8) as u32;
    [255, (210 - 22 * h) as u8, 40]
}

/// Cell content, in drawing priority order.
enum Cell {
    Defect,
    Forward,
    Backward,
    Anti,
    Stack(u16),
    Data,
    Empty,
}

fn classify(state: &DecoderState, i: usize) -> Cell {
    let mut stack = 0u16;
    let mut forward = false;
    let mut backward = false;
    let mut anti = false;
    let mut defect = false;
    for k in 0..state.direction_count() {
        let s = state.site(k, i);
        defect |= s.defect;
        forward |= s.forward;
        backward |= s.backward;
        anti |= s.anti;
        stack = stack.max(s.stack);
    }
    if defect {
        Cell::Defect
    } else if forward {
        Cell::Forward
    } else if backward {
        Cell::Backward
    } else if anti {
        Cell::Anti
    } else if stack > 0 {
        Cell::Stack(stack)
    } else if state.data().get(i) {
        Cell::Data
    } else {
        Cell::Empty
    }
}

fn cell_color(c: &Cell) -> [u8; 3] {
    match c {
        Cell::Defect => COLOR_DEFECT,
        Cell::Forward => COLOR_FORWARD,
        Cell::Backward => COLOR_BACKWARD,
        Cell::Anti => COLOR_ANTI,
        Cell::Stack(h) => stack_color(*h),
        Cell::Data => COLOR_DATA,
        Cell::Empty => COLOR_EMPTY,
    }
}

fn cell_glyph(c: &Cell) -> char {
    match c {
        Cell::Defect => '#',
        Cell::Forward => '>',
        Cell::Backward => '<',
        Cell::Anti => '~',
        Cell::Stack(h) => char::from_digit((*h).min(9) as u32, 10).unwrap(),
        Cell::Data => 'x',
        Cell::Empty => '.',
    }
}

fn signal_grid(trace: &Trace) -> (usize, usize, Vec<Cell>) {
    let width = trace.states.first().map(|s| s.topology().sites()).unwrap_or(0);
    let height = trace.states.len();
    let mut cells = Vec::with_capacity(width * height);
    for state in &trace.states {
        for i in 0..width {
            cells.push(classify(state, i));
        }
    }
    (width, height, cells)
}

fn bits_grid(columns: usize, rows: &[repdec_core::lattice::BitPlane]) -> (usize, usize, Vec<Cell>) {
    let mut cells = Vec::with_capacity(columns * rows.len());
    for row in rows {
        for i in 0..columns {
            cells.push(if row.get(i) { Cell::Data } else { Cell::Empty });
        }
    }
    (columns, rows.len(), cells)
}

fn grid(file: &TraceFile) -> Result<(usize, usize, Vec<Cell>), CliError> {
    match file {
        TraceFile::Signal { trace, .. } => {
            if trace.states.is_empty() {
                return Err(CliError::Config("trace holds no snapshots".into()));
            }
            Ok(signal_grid(trace))
        }
        TraceFile::Bits { columns, rows, .. } => {
            if rows.is_empty() {
                return Err(CliError::Config("trace holds no snapshots".into()));
            }
            Ok(bits_grid(*columns, rows))
        }
    }
}

pub fn render_text(file: &TraceFile) -> Result<String, CliError> {
    let (w, h, cells) = grid(file)?;
    let mut out = String::with_capacity((w + 1) * h);
    for r in 0..h {
        for c in 0..w {
            out.push(cell_glyph(&cells[r * w + c]));
        }
        out.push('\n');
    }
    Ok(out)
}

/// Binary P6 image, one pixel per (site, step) cell.
pub fn render_ppm(file: &TraceFile) -> Result<Vec<u8>, CliError> {
    let (w, h, cells) = grid(file)?;
    let mut out = format!("P6\n{w} {h}\n255\n").into_bytes();
    out.reserve(3 * w * h);
    for cell in &cells {
        out.extend_from_slice(&cell_color(cell));
    }
    Ok(out)
}

pub fn render_svg(file: &TraceFile) -> Result<String, CliError> {
    let (w, h, cells) = grid(file)?;
    let cell_px = 4;
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" shape-rendering=\"crispEdges\">\n",
        w * cell_px,
        h * cell_px
    );
    out.push_str(&format!(
        "<rect width=\"{}\" height=\"{}\" fill=\"#ffffff\"/>\n",
        w * cell_px,
        h * cell_px
    ));
    for r in 0..h {
        for c in 0..w {
            let cell = &cells[r * w + c];
            if matches!(cell, Cell::Empty) {
                continue;
            }
            let [cr, cg, cb] = cell_color(cell);
            out.push_str(&format!(
                "<rect x=\"{}\" y=\"{}\" width=\"{cell_px}\" height=\"{cell_px}\" fill=\"#{cr:02x}{cg:02x}{cb:02x}\"/>\n",
                c * cell_px,
                r * cell_px
            ));
        }
    }
    out.push_str("</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ExperimentConfig;
    use crate::records::Header;
    use repdec_core::lattice::{DecoderState, DefectSet};
    use repdec_core::signal::{asr_run, SignalRuleParams};

    fn erasure_trace() -> TraceFile {
        let sigma = DefectSet::new(vec![0, 6]);
        let params = SignalRuleParams::asymmetric();
        let state = DecoderState::erasure_window(&sigma, 1).unwrap();
        let trace = asr_run(state, &params, 20, 1).unwrap();
        TraceFile::Signal { header: Header::new(&ExperimentConfig::default()), trace }
    }

    #[test]
    fn ppm_has_valid_p6_header_and_size() {
        let file = erasure_trace();
        let ppm = render_ppm(&file).unwrap();
        let header = String::from_utf8_lossy(&ppm[..20.min(ppm.len())]).to_string();
        assert!(header.starts_with("P6\n"));
        let (w, h) = match &file {
            TraceFile::Signal { trace, .. } => {
                (trace.states[0].topology().sites(), trace.states.len())
            }
            _ => unreachable!(),
        };
        assert!(header.contains(&format!("{w} {h}")));
        let pixels_at = ppm.iter().position(|&b| b == b'\n').unwrap();
        let body = &ppm[..];
        // header is three lines; body length is 3 w h
        let mut newlines = 0;
        let mut offset = 0;
        for (i, &b) in body.iter().enumerate() {
            if b == b'\n' {
                newlines += 1;
                if newlines == 3 {
                    offset = i + 1;
                    break;
                }
            }
        }
        assert_eq!(body.len() - offset, 3 * w * h, "{pixels_at}");
    }

    #[test]
    fn erasure_trace_draws_a_signal_fan() {
        let file = erasure_trace();
        let text = render_text(&file).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        // Initial row: two defects, nothing else.
        assert_eq!(lines[0].matches('#').count(), 2);
        // Signals appear in later rows and the last row is clean again.
        assert!(lines[3].contains('>'));
        assert!(!lines.last().unwrap().contains('#'));
        assert!(!lines.last().unwrap().contains('>'));
    }

    #[test]
    fn zero_trace_renders_blank() {
        use repdec_core::lattice::Topology;
        let params = SignalRuleParams::asymmetric();
        let state = DecoderState::new_asymmetric(Topology::Ring { n: 8 });
        let trace = asr_run(state, &params, 4, 1).unwrap();
        let file =
            TraceFile::Signal { header: Header::new(&ExperimentConfig::default()), trace };
        let text = render_text(&file).unwrap();
        assert!(text.lines().all(|l| l.chars().all(|c| c == '.')));
        let svg = render_svg(&file).unwrap();
        assert!(svg.starts_with("<svg"));
    }
}
