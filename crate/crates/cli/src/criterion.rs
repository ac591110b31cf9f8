use std::hash::{DefaultHasher, Hash, Hasher};

use hybrid_amr::{Element, Vertices, ROOT_LEN};

/// Adapt criterion for the moving-wall loop. Coordinates are tree-local and scaled to the unit cube.
#[derive(Debug, Clone, PartialEq)]
pub enum Criterion {
    /// Slab `|n·c - d| < thickness / 2` around a plane with normal `n`, swept through the tree.
    Wall { normal: [f64; 3], thickness: f64 },
    /// Refine a leaf with the given probability, decided by hashing the seed with the leaf.
    Random { probability: f64 },
}

impl Criterion {
    pub fn parse(text: &str) -> Result<Self, String> {
        let (name, params) = text.split_once(':').unwrap_or((text, ""));
        let nums: Vec<f64> = if params.is_empty() {
            Vec::new()
        } else {
            params
                .split(',')
                .map(|p| p.trim().parse::<f64>().map_err(|_| format!("criterion {name}: bad number {p:?}")))
                .collect::<Result<_, _>>()?
        };
        if nums.iter().any(|v| !v.is_finite()) {
            return Err(format!("criterion {name}: parameters must be finite"));
        }
        match (name, nums.as_slice()) {
            ("wall", [t]) => Self::wall([1.0, 0.5, 0.25], *t),
            ("wall", [nx, ny, nz, t]) => Self::wall([*nx, *ny, *nz], *t),
            ("wall", _) => Err("criterion wall takes THICKNESS or NX,NY,NZ,THICKNESS".into()),
            ("random", [p]) if (0.0..=1.0).contains(p) => Ok(Criterion::Random { probability: *p }),
            ("random", _) => Err("criterion random takes one probability in [0, 1]".into()),
            _ => Err(format!("unknown criterion {name:?} (expected wall or random)")),
        }
    }

    fn wall(normal: [f64; 3], thickness: f64) -> Result<Self, String> {
        let norm = normal.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err("criterion wall: the normal must be nonzero".into());
        }
        if thickness < 0.0 {
            return Err("criterion wall: thickness must be nonnegative".into());
        }
        Ok(Criterion::Wall { normal: normal.map(|v| v / norm), thickness })
    }

    /// Plane offset for wall position `i` of `k`, spread evenly over the unit cube.
    pub fn wall_offset(&self, i: usize, k: usize) -> f64 {
        let Criterion::Wall { normal, .. } = self else { return 0.0 };
        let (lo, hi) = (0..8).fold((f64::MAX, f64::MIN), |(lo, hi), c| {
            let d: f64 = (0..3).map(|a| if c >> a & 1 == 1 { normal[a] } else { 0.0 }).sum();
            (lo.min(d), hi.max(d))
        });
        lo + (hi - lo) * (i + 1) as f64 / (k + 1) as f64
    }

    pub fn marks(&self, tree: usize, e: &Element, vertices: &Vertices, offset: f64, seed: u64) -> bool {
        match self {
            Criterion::Wall { normal, thickness } => {
                let c = centroid(vertices);
                let d: f64 = (0..3).map(|a| normal[a] * c[a]).sum();
                (d - offset).abs() < thickness / 2.0
            }
            Criterion::Random { probability } => {
                let mut h = DefaultHasher::new();
                (seed, tree, e).hash(&mut h);
                (h.finish() as f64 / u64::MAX as f64) < *probability
            }
        }
    }
}

pub fn centroid(vertices: &Vertices) -> [f64; 3] {
    let n = vertices.len() as f64 * ROOT_LEN as f64;
    let mut c = [0.0; 3];
    for v in vertices {
        for a in 0..3 {
            c[a] += v[a] as f64;
        }
    }
    c.map(|s| s / n)
}
