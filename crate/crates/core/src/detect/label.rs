use crate::raster::BinaryImage;

/// Pixel coordinates `(x, y)`.
pub type Pixel = (u32, u32);

/// A connected bright region. Pixels are kept in raster order (row-major).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Blob {
    pub label: usize,
    pub pixels: Vec<Pixel>,
}

impl Blob {
    pub fn area(&self) -> usize {
        self.pixels.len()
    }

    /// Inclusive bounding box `(x0, y0, x1, y1)`, `None` for an empty blob.
    pub fn bbox(&self) -> Option<(u32, u32, u32, u32)> {
        let first = self.pixels.first()?;
        let init = (first.0, first.1, first.0, first.1);
        Some(self.pixels.iter().fold(init, |(x0, y0, x1, y1), &(x, y)| {
            (x0.min(x), y0.min(y), x1.max(x), y1.max(y))
        }))
    }
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

// the smaller label always becomes the root
fn union(parent: &mut [usize], a: usize, b: usize) {
    let (ra, rb) = (find(parent, a), find(parent, b));
    if ra != rb {
        parent[ra.max(rb)] = ra.min(rb);
    }
}

/// 8-connected components with at least `min_px` pixels, labelled `0..n` in
/// the raster order of each component's first pixel.
///
/// Classic two-pass labelling with union-find over provisional labels.
pub fn label_components(bin: &BinaryImage, min_px: usize) -> Vec<Blob> {
    let (w, h) = (bin.width(), bin.height());
    const NONE: usize = usize::MAX;
    let mut prov = vec![NONE; w * h];
    let mut parent: Vec<usize> = Vec::new();

    for y in 0..h {
        for x in 0..w {
            if !bin.get(x, y) {
                continue;
            }
            // already visited neighbours: W, NW, N, NE
            let mut neigh = [NONE; 4];
            if x > 0 {
                neigh[0] = prov[y * w + x - 1];
            }
            if y > 0 {
                let up = (y - 1) * w;
                if x > 0 {
                    neigh[1] = prov[up + x - 1];
                }
                neigh[2] = prov[up + x];
                if x + 1 < w {
                    neigh[3] = prov[up + x + 1];
                }
            }
            let lowest = neigh.iter().copied().filter(|&l| l != NONE).min();
            let l = match lowest {
                Some(l) => {
                    for &n in neigh.iter().filter(|&&n| n != NONE) {
                        union(&mut parent, l, n);
                    }
                    l
                }
                None => {
                    parent.push(parent.len());
                    parent.len() - 1
                }
            };
            prov[y * w + x] = l;
        }
    }

    // Roots are minimal provisional labels, and those are handed out at each
    // component's first raster pixel, so first-seen order below is discovery order.
    let mut slot = vec![NONE; parent.len()];
    let mut groups: Vec<Vec<Pixel>> = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let l = prov[y * w + x];
            if l == NONE {
                continue;
            }
            let root = find(&mut parent, l);
            if slot[root] == NONE {
                slot[root] = groups.len();
                groups.push(Vec::new());
            }
            groups[slot[root]].push((x as u32, y as u32));
        }
    }

    groups
        .into_iter()
        .filter(|g| g.len() >= min_px)
        .enumerate()
        .map(|(label, pixels)| Blob { label, pixels })
        .collect()
}
