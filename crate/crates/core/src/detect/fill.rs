use super::{blob_moments, Blob, Pixel};

/// Integer line from `from` to `to`, both endpoints included.
pub fn bresenham(from: (i64, i64), to: (i64, i64)) -> Vec<(i64, i64)> {
    let (mut x, mut y) = from;
    let dx = (to.0 - x).abs();
    let dy = -(to.1 - y).abs();
    let sx = if x < to.0 { 1 } else { -1 };
    let sy = if y < to.1 { 1 } else { -1 };
    let mut err = dx + dy;
    let mut out = Vec::with_capacity((dx.max(-dy) + 1) as usize);
    loop {
        out.push((x, y));
        if (x, y) == to {
            return out;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
    }
}

/// Fills the blob radially: every pixel is joined to the rounded blob mean by
/// a Bresenham line. The mean moves as pixels are added, so this repeats until
/// nothing changes. The result is star-shaped about its own rounded mean,
/// hence filling it again is a no-op.
///
/// Lines stay inside the bounding box of the input, so `width` and `height`
/// only matter as a sanity bound.
pub fn star_fill(blob: &Blob, width: usize, height: usize) -> Blob {
    let Some((x0, y0, x1, y1)) = blob.bbox() else {
        return blob.clone();
    };
    debug_assert!((x1 as usize) < width && (y1 as usize) < height);
    let (bw, bh) = ((x1 - x0 + 1) as usize, (y1 - y0 + 1) as usize);
    let idx = |x: i64, y: i64| (y - y0 as i64) as usize * bw + (x - x0 as i64) as usize;

    let mut mask = vec![false; bw * bh];
    let mut members: Vec<(i64, i64)> = Vec::with_capacity(blob.area());
    for &(x, y) in &blob.pixels {
        mask[idx(x as i64, y as i64)] = true;
        members.push((x as i64, y as i64));
    }

    loop {
        let pixels: Vec<Pixel> = members.iter().map(|&(x, y)| (x as u32, y as u32)).collect();
        let mean = blob_moments(&pixels).expect("non-empty").mean;
        let centre = (mean.x.round() as i64, mean.y.round() as i64);
        let before = members.len();
        for i in 0..before {
            for (x, y) in bresenham(members[i], centre) {
                let k = idx(x, y);
                if !mask[k] {
                    mask[k] = true;
                    members.push((x, y));
                }
            }
        }
        if members.len() == before {
            break;
        }
    }

    let mut pixels = Vec::with_capacity(members.len());
    for row in 0..bh {
        for col in 0..bw {
            if mask[row * bw + col] {
                pixels.push((x0 + col as u32, y0 + row as u32));
            }
        }
    }
    Blob { label: blob.label, pixels }
}
