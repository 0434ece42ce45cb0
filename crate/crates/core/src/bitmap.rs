//! Cognitive-map bitmaps: one pixel per neuron.
//!
//! Lattice networks use their own `rows × cols` layout. GNG neurons have no
//! spatial arrangement, so they are laid out row-major by index on a
//! `⌈√n⌉`-wide square, which is what makes GNG maps look scattered.

use std::path::Path;

use image::{Rgb, RgbImage};

use crate::error::{Error, Result};
use crate::io::write_atomic;
use crate::sonn::{Network, NeuronId, NeuronSet};

pub const FREE: Rgb<u8> = Rgb([255, 255, 255]);
pub const BLOCKED: Rgb<u8> = Rgb([255, 0, 0]);
pub const PATH: Rgb<u8> = Rgb([0, 0, 255]);
pub const ENDPOINT: Rgb<u8> = Rgb([0, 255, 0]);
/// Padding pixels past the last neuron of a GNG square.
pub const UNUSED: Rgb<u8> = Rgb([0, 0, 0]);

/// Pixel grid of a network; neuron `n` sits at pixel `n` in row-major order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MapLayout {
    pub width: usize,
    pub height: usize,
    pub neurons: usize,
}

impl MapLayout {
    pub fn for_network(net: &Network) -> Self {
        let n = net.len();
        match net.grid_shape() {
            Some((rows, cols)) => MapLayout {
                width: cols,
                height: rows,
                neurons: n,
            },
            None => {
                let side = (n as f64).sqrt().ceil() as usize;
                let side = if side * side < n { side + 1 } else { side.max(1) };
                MapLayout {
                    width: side,
                    height: n.div_ceil(side).max(1),
                    neurons: n,
                }
            }
        }
    }

    pub fn pixel(&self, n: NeuronId) -> (u32, u32) {
        ((n % self.width) as u32, (n / self.width) as u32)
    }
}

/// Renders the map. Later layers win: blocked, then path, then endpoints.
pub fn render(net: &Network, blocked: &NeuronSet, path: &[NeuronId], endpoints: &[NeuronId]) -> RgbImage {
    let layout = MapLayout::for_network(net);
    let mut img = RgbImage::from_pixel(layout.width as u32, layout.height as u32, UNUSED);
    for n in 0..net.len() {
        let (x, y) = layout.pixel(n);
        img.put_pixel(x, y, if blocked.contains(n) { BLOCKED } else { FREE });
    }
    for &n in path.iter().filter(|&&n| n < net.len()) {
        let (x, y) = layout.pixel(n);
        img.put_pixel(x, y, PATH);
    }
    for &n in endpoints.iter().filter(|&&n| n < net.len()) {
        let (x, y) = layout.pixel(n);
        img.put_pixel(x, y, ENDPOINT);
    }
    img
}

/// Binary PPM (P6).
pub fn to_ppm(img: &RgbImage) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.as_raw());
    out
}

/// Writes PNG, or PPM when the extension is `.ppm`.
pub fn save(img: &RgbImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
    let bytes = match ext.as_deref() {
        Some("ppm") => to_ppm(img),
        Some("png") | None => {
            let mut buf = std::io::Cursor::new(Vec::new());
            img.write_to(&mut buf, image::ImageFormat::Png)?;
            buf.into_inner()
        }
        Some(other) => return Err(Error::invalid(format!("unsupported image extension `.{other}`"))),
    };
    write_atomic(path, &bytes)
}

/// Counts pixels of one colour.
pub fn count(img: &RgbImage, color: Rgb<u8>) -> usize {
    img.pixels().filter(|p| **p == color).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sonn::NetworkKind;

    fn gng(n: usize) -> Network {
        let w = (0..n).map(|i| i as f64).collect();
        Network::new(NetworkKind::Gng, 1, w, (1..n).map(|i| (i - 1, i)), None, None).unwrap()
    }

    #[test]
    fn gng_square_layout() {
        let l = MapLayout::for_network(&gng(10));
        assert_eq!((l.width, l.height), (4, 3));
        assert_eq!(l.pixel(5), (1, 1));
        let l = MapLayout::for_network(&gng(16));
        assert_eq!((l.width, l.height), (4, 4));
    }

    #[test]
    fn colours() {
        let net = gng(9);
        let blocked = NeuronSet::from_ids(9, [4, 8]);
        let img = render(&net, &blocked, &[0, 1, 2], &[0, 2]);
        assert_eq!(count(&img, BLOCKED), 2);
        assert_eq!(count(&img, PATH), 1);
        assert_eq!(count(&img, ENDPOINT), 2);
        assert_eq!(count(&img, FREE), 4);
        assert!(to_ppm(&img).starts_with(b"P6\n3 3\n255\n"));
    }
}
