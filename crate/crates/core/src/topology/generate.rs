use super::{Result, Topology, TopologyError};

/// Parametric device families used as desk-scale stand-ins for hardware.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TopologyKind {
    Line {
        n: usize,
    },
    Ring {
        n: usize,
    },
    Grid {
        rows: usize,
        cols: usize,
    },
    /// Heavy-hex lattice with `rows` long rows of `cols` qubits joined by
    /// bridge qubits every fourth column, in the 127-qubit Eagle numbering.
    HeavyHex {
        rows: usize,
        cols: usize,
    },
}

/// The 127-qubit, 144-coupling heavy-hex device.
pub const HEAVY_HEX_REFERENCE: TopologyKind = TopologyKind::HeavyHex { rows: 7, cols: 15 };

impl TopologyKind {
    pub fn generate(&self) -> Result<Topology> {
        match *self {
            TopologyKind::Line { n } => {
                if n < 2 {
                    return Err(unsupported("line", format!("n={n}, need n >= 2")));
                }
                Topology::new(n, (0..n - 1).map(|i| (i, i + 1)))
            }
            TopologyKind::Ring { n } => {
                if n < 3 {
                    return Err(unsupported("ring", format!("n={n}, need n >= 3")));
                }
                Topology::new(n, (0..n).map(|i| (i, (i + 1) % n)))
            }
            TopologyKind::Grid { rows, cols } => {
                if rows == 0 || cols == 0 || rows * cols < 2 {
                    return Err(unsupported("grid", format!("{rows}x{cols}")));
                }
                let at = |r: usize, c: usize| r * cols + c;
                let mut edges = Vec::new();
                for r in 0..rows {
                    for c in 0..cols {
                        if c + 1 < cols {
                            edges.push((at(r, c), at(r, c + 1)));
                        }
                        if r + 1 < rows {
                            edges.push((at(r, c), at(r + 1, c)));
                        }
                    }
                }
                Topology::new(rows * cols, edges)
            }
            TopologyKind::HeavyHex { rows, cols } => heavy_hex(rows, cols),
        }
    }
}

fn unsupported(kind: &'static str, reason: String) -> TopologyError {
    TopologyError::UnsupportedSize { kind, reason }
}

/// Bridge columns between long row `r` and `r + 1` alternate between offset 0
/// and offset 2 so that the lattice closes into 12-cycles.
fn bridge_columns(r: usize, cols: usize) -> impl Iterator<Item = usize> {
    let offset = if r % 2 == 0 { 0 } else { 2 };
    (offset..cols).step_by(4)
}

fn heavy_hex(rows: usize, cols: usize) -> Result<Topology> {
    if rows < 2 {
        return Err(unsupported(
            "heavy_hex",
            format!("rows={rows}, need rows >= 2"),
        ));
    }
    if cols < 3 || cols % 4 != 3 {
        return Err(unsupported(
            "heavy_hex",
            format!("cols={cols}, need cols >= 3 with cols % 4 == 3"),
        ));
    }

    // Row-end qubits of the outermost rows that no bridge touches are dropped,
    // as on the Eagle device.
    let row_columns = |r: usize| -> Vec<usize> {
        let mut used: Vec<usize> = (0..cols).collect();
        let touches = |c: usize| -> bool {
            (r + 1 < rows && bridge_columns(r, cols).any(|b| b == c))
                || (r > 0 && bridge_columns(r - 1, cols).any(|b| b == c))
        };
        if r == 0 && !touches(cols - 1) {
            used.pop();
        }
        if r == rows - 1 && !touches(0) {
            used.remove(0);
        }
        used
    };

    let mut next = 0usize;
    let mut row_index: Vec<Vec<Option<usize>>> = Vec::with_capacity(rows);
    let mut bridges: Vec<Vec<(usize, usize)>> = Vec::with_capacity(rows);
    for r in 0..rows {
        let mut index = vec![None; cols];
        for c in row_columns(r) {
            index[c] = Some(next);
            next += 1;
        }
        row_index.push(index);
        let mut row_bridges = Vec::new();
        if r + 1 < rows {
            for c in bridge_columns(r, cols) {
                row_bridges.push((c, next));
                next += 1;
            }
        }
        bridges.push(row_bridges);
    }

    let mut edges = Vec::new();
    for r in 0..rows {
        let index = &row_index[r];
        for c in 0..cols - 1 {
            if let (Some(a), Some(b)) = (index[c], index[c + 1]) {
                edges.push((a, b));
            }
        }
        for &(c, bridge) in &bridges[r] {
            let above = row_index[r][c].expect("bridge column exists in upper row");
            let below = row_index[r + 1][c].expect("bridge column exists in lower row");
            edges.push((above, bridge));
            edges.push((bridge, below));
        }
    }
    Topology::new(next, edges)
}
