//! Small named complexes used throughout the tests, benches and CLI examples.

use crate::complex::{build_complex, Cell, CellId, ChainComplex};

/// Edge ids of the triangle fixtures: `e01`, `e12`, `e02`.
pub const TRIANGLE_EDGES: [CellId; 3] = [3, 4, 5];
pub const TRIANGLE_FACE: CellId = 6;

/// Edge ids `a`, `b`, `c` of the theta graph; all three join vertices 0 and 1.
pub const THETA_EDGES: [CellId; 3] = [2, 3, 4];
pub const THETA_FACE: CellId = 5;

fn triangle_cells() -> Vec<Cell> {
    vec![
        Cell::vertex(0),
        Cell::vertex(1),
        Cell::vertex(2),
        Cell::new(3, 1, vec![0, 1]),
        Cell::new(4, 1, vec![1, 2]),
        Cell::new(5, 1, vec![0, 2]),
    ]
}

pub fn hollow_triangle() -> ChainComplex {
    build_complex(triangle_cells()).unwrap()
}

pub fn filled_triangle() -> ChainComplex {
    let mut cells = triangle_cells();
    cells.push(Cell::new(TRIANGLE_FACE, 2, vec![3, 4, 5]));
    build_complex(cells).unwrap()
}

/// Filled triangle with vertices born at 0, edges at 1 and the face at 2.
pub fn triangle_filtration() -> ChainComplex {
    let mut cells = triangle_cells();
    cells.push(Cell::new(TRIANGLE_FACE, 2, vec![3, 4, 5]));
    for c in &mut cells {
        c.birth = c.dim as f64;
    }
    build_complex(cells).unwrap()
}

fn theta_cells() -> Vec<Cell> {
    vec![
        Cell::vertex(0),
        Cell::vertex(1),
        Cell::new(2, 1, vec![0, 1]),
        Cell::new(3, 1, vec![0, 1]),
        Cell::new(4, 1, vec![0, 1]),
    ]
}

pub fn theta() -> ChainComplex {
    build_complex(theta_cells()).unwrap()
}

/// Theta graph with a bigon 2-cell glued along `a + b`.
pub fn theta_with_face() -> ChainComplex {
    let mut cells = theta_cells();
    cells.push(Cell::new(THETA_FACE, 2, vec![2, 3]));
    build_complex(cells).unwrap()
}

/// Boundary of the tetrahedron: a 2-sphere with 4 + 6 + 4 cells.
pub fn sphere() -> ChainComplex {
    let pairs = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
    let mut cells: Vec<Cell> = (0..4).map(Cell::vertex).collect();
    for (i, &(u, v)) in pairs.iter().enumerate() {
        cells.push(Cell::new(4 + i, 1, vec![u, v]));
    }
    let edge = |u: usize, v: usize| 4 + pairs.iter().position(|&p| p == (u, v)).unwrap();
    for (i, [a, b, c]) in [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]].into_iter().enumerate() {
        cells.push(Cell::new(10 + i, 2, vec![edge(a, b), edge(b, c), edge(a, c)]));
    }
    build_complex(cells).unwrap()
}

/// Square-cell torus on an `n x n` grid (`n >= 2`): `n^2` vertices,
/// `2n^2` edges, `n^2` squares. `n = 2` is the 16-cell fixture.
pub fn torus(n: usize) -> ChainComplex {
    square_surface(n, false)
}

/// Square-cell Klein bottle on an `n x n` grid (`n >= 2`); the vertical
/// wrap reverses the horizontal direction.
pub fn klein_bottle(n: usize) -> ChainComplex {
    square_surface(n, true)
}

fn square_surface(n: usize, twisted: bool) -> ChainComplex {
    assert!(n >= 2, "square surfaces need n >= 2");
    let vid = |i: usize, j: usize| i * n + j;
    let hid = |i: usize, j: usize| n * n + i * n + j;
    let vert = |i: usize, j: usize| 2 * n * n + i * n + j;
    let fid = |i: usize, j: usize| 3 * n * n + i * n + j;
    // vertex reached by stepping down from row n-1
    let wrap = |j: usize| if twisted { (n - j) % n } else { j };
    let mut cells = Vec::with_capacity(4 * n * n);
    for i in 0..n {
        for j in 0..n {
            cells.push(Cell::vertex(vid(i, j)));
        }
    }
    for i in 0..n {
        for j in 0..n {
            cells.push(Cell::new(hid(i, j), 1, vec![vid(i, j), vid(i, (j + 1) % n)]));
        }
    }
    for i in 0..n {
        for j in 0..n {
            let below = if i + 1 < n { vid(i + 1, j) } else { vid(0, wrap(j)) };
            cells.push(Cell::new(vert(i, j), 1, vec![vid(i, j), below]));
        }
    }
    for i in 0..n {
        for j in 0..n {
            let top = if i + 1 < n {
                hid(i + 1, j)
            } else if twisted {
                hid(0, (2 * n - j - 1) % n)
            } else {
                hid(0, j)
            };
            cells.push(Cell::new(fid(i, j), 2, vec![hid(i, j), top, vert(i, j), vert(i, (j + 1) % n)]));
        }
    }
    build_complex(cells).unwrap()
}

/// Four-cycle `0-1-2-3-0` plus the pendant edge `0-4`.
///
/// Edge ids: `5:(0,1) 6:(1,2) 7:(2,3) 8:(3,0) 9:(0,4)`.
pub fn square_with_pendant() -> ChainComplex {
    let mut cells: Vec<Cell> = (0..5).map(Cell::vertex).collect();
    for (i, (u, v)) in [(0, 1), (1, 2), (2, 3), (3, 0), (0, 4)].into_iter().enumerate() {
        cells.push(Cell::new(5 + i, 1, vec![u, v]));
    }
    build_complex(cells).unwrap()
}

/// Path graph `0 - 1 - ... - (n-1)`; edge `i` has id `n + i`.
pub fn path_graph(n: usize) -> ChainComplex {
    let mut cells: Vec<Cell> = (0..n).map(Cell::vertex).collect();
    for i in 0..n.saturating_sub(1) {
        cells.push(Cell::new(n + i, 1, vec![i, i + 1]));
    }
    build_complex(cells).unwrap()
}

/// Cycle graph on `n >= 3` vertices; edge `i` joins `i` and `(i+1) % n`.
pub fn cycle_graph(n: usize) -> ChainComplex {
    let mut cells: Vec<Cell> = (0..n).map(Cell::vertex).collect();
    for i in 0..n {
        let (u, v) = (i, (i + 1) % n);
        cells.push(Cell::new(n + i, 1, vec![u.min(v), u.max(v)]));
    }
    build_complex(cells).unwrap()
}
