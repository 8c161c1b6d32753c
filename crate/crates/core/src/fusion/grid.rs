use crate::error::{MotsError, Result};

/// Dense `C x H x W` feature tensor, channel-major then row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureGrid {
    channels: usize,
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl FeatureGrid {
    pub fn zeros(channels: usize, height: usize, width: usize) -> Self {
        FeatureGrid {
            channels,
            height,
            width,
            data: vec![0.0; channels * height * width],
        }
    }

    pub fn from_vec(channels: usize, height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if channels == 0 || height == 0 || width == 0 {
            return Err(MotsError::shape("feature grid dimensions must be positive"));
        }
        if data.len() != channels * height * width {
            return Err(MotsError::shape(format!(
                "feature data has {} values, expected {channels}x{height}x{width}",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(MotsError::shape("feature grid contains non-finite values"));
        }
        Ok(FeatureGrid {
            channels,
            height,
            width,
            data,
        })
    }

    pub fn from_fn(
        channels: usize,
        height: usize,
        width: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Self {
        let mut data = Vec::with_capacity(channels * height * width);
        for c in 0..channels {
            for y in 0..height {
                for x in 0..width {
                    data.push(f(c, y, x));
                }
            }
        }
        FeatureGrid {
            channels,
            height,
            width,
            data,
        }
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.channels, self.height, self.width)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, c: usize, y: usize, x: usize) -> f64 {
        self.data[(c * self.height + y) * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, c: usize, y: usize, x: usize, v: f64) {
        self.data[(c * self.height + y) * self.width + x] = v;
    }

    pub fn channel(&self, c: usize) -> &[f64] {
        let n = self.height * self.width;
        &self.data[c * n..(c + 1) * n]
    }

    /// Per-pixel feature vector across channels.
    pub fn pixel(&self, y: usize, x: usize) -> Vec<f64> {
        (0..self.channels).map(|c| self.get(c, y, x)).collect()
    }

    /// Bilinear sample at fractional index coordinates; each of the four
    /// neighbours that falls outside the grid contributes 0.
    pub fn sample(&self, c: usize, y: f64, x: f64) -> f64 {
        bilinear(self.channel(c), self.height, self.width, y, x)
    }

    pub fn scale(&mut self, s: f64) {
        self.data.iter_mut().for_each(|v| *v *= s);
    }

    pub fn add_assign(&mut self, other: &FeatureGrid) -> Result<()> {
        self.check_same_shape(other)?;
        self.data.iter_mut().zip(&other.data).for_each(|(a, b)| *a += b);
        Ok(())
    }

    pub(crate) fn check_same_shape(&self, other: &FeatureGrid) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(MotsError::shape(format!(
                "feature grid {:?} vs {:?}",
                self.shape(),
                other.shape()
            )));
        }
        Ok(())
    }

    /// Largest absolute coordinate-wise difference.
    pub fn max_abs_diff(&self, other: &FeatureGrid) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

#[inline]
pub(crate) fn bilinear(plane: &[f64], height: usize, width: usize, y: f64, x: f64) -> f64 {
    let (h, w) = (height as i64, width as i64);
    let y0 = y.floor();
    let x0 = x.floor();
    let (fy, fx) = (y - y0, x - x0);
    let (y0, x0) = (y0 as i64, x0 as i64);
    if y0 < -1 || x0 < -1 || y0 >= h || x0 >= w {
        return 0.0;
    }
    let at = |yy: i64, xx: i64| -> f64 {
        if yy < 0 || xx < 0 || yy >= h || xx >= w {
            0.0
        } else {
            plane[(yy * w + xx) as usize]
        }
    };
    let top = (1.0 - fx) * at(y0, x0) + fx * at(y0, x0 + 1);
    let bottom = (1.0 - fx) * at(y0 + 1, x0) + fx * at(y0 + 1, x0 + 1);
    (1.0 - fy) * top + fy * bottom
}

/// Per-pixel displacement `(dx, dy)` in feature-grid units.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowField {
    height: usize,
    width: usize,
    dx: Vec<f64>,
    dy: Vec<f64>,
}

impl FlowField {
    pub fn zeros(height: usize, width: usize) -> Self {
        FlowField {
            height,
            width,
            dx: vec![0.0; height * width],
            dy: vec![0.0; height * width],
        }
    }

    pub fn uniform(height: usize, width: usize, dx: f64, dy: f64) -> Self {
        FlowField {
            height,
            width,
            dx: vec![dx; height * width],
            dy: vec![dy; height * width],
        }
    }

    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> (f64, f64)) -> Self {
        let mut dx = Vec::with_capacity(height * width);
        let mut dy = Vec::with_capacity(height * width);
        for y in 0..height {
            for x in 0..width {
                let (a, b) = f(y, x);
                dx.push(a);
                dy.push(b);
            }
        }
        FlowField { height, width, dx, dy }
    }

    pub fn from_vecs(height: usize, width: usize, dx: Vec<f64>, dy: Vec<f64>) -> Result<Self> {
        if dx.len() != height * width || dy.len() != height * width {
            return Err(MotsError::shape("flow component length does not match dimensions"));
        }
        if dx.iter().chain(&dy).any(|v| !v.is_finite()) {
            return Err(MotsError::shape("flow contains non-finite values"));
        }
        Ok(FlowField { height, width, dx, dy })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn at(&self, y: usize, x: usize) -> (f64, f64) {
        let i = y * self.width + x;
        (self.dx[i], self.dy[i])
    }

    pub fn dx(&self) -> &[f64] {
        &self.dx
    }

    pub fn dy(&self) -> &[f64] {
        &self.dy
    }

    pub fn dx_mut(&mut self) -> &mut [f64] {
        &mut self.dx
    }

    pub fn dy_mut(&mut self) -> &mut [f64] {
        &mut self.dy
    }
}

/// Bilinear downsample by an integer factor, with displacements rescaled by `1/factor`.
pub fn downsample_flow(flow: &FlowField, factor: usize) -> Result<FlowField> {
    if factor == 0 || !flow.height.is_multiple_of(factor) || !flow.width.is_multiple_of(factor) {
        return Err(MotsError::shape(format!(
            "flow {}x{} is not divisible by factor {factor}",
            flow.height, flow.width
        )));
    }
    if factor == 1 {
        return Ok(flow.clone());
    }
    let (h, w) = (flow.height / factor, flow.width / factor);
    let f = factor as f64;
    let mut out = FlowField::zeros(h, w);
    for y in 0..h {
        // centre of output cell y in source index coordinates
        let sy = (y as f64 + 0.5) * f - 0.5;
        for x in 0..w {
            let sx = (x as f64 + 0.5) * f - 0.5;
            let i = y * w + x;
            out.dx[i] = bilinear(&flow.dx, flow.height, flow.width, sy, sx) / f;
            out.dy[i] = bilinear(&flow.dy, flow.height, flow.width, sy, sx) / f;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn downsample_identity_and_constant() {
        let f = FlowField::from_fn(4, 6, |y, x| (x as f64, -(y as f64)));
        assert_eq!(downsample_flow(&f, 1).unwrap(), f);
        let c = FlowField::uniform(8, 8, 4.0, 4.0);
        let d = downsample_flow(&c, 2).unwrap();
        assert_eq!((d.height(), d.width()), (4, 4));
        assert!(d.dx().iter().chain(d.dy()).all(|&v| v == 2.0));
    }

    #[test]
    fn downsample_ramp() {
        // oracle: average of the 2x2 source block, halved
        let f = FlowField::from_fn(8, 8, |y, x| (x as f64, 3.0 * y as f64));
        let d = downsample_flow(&f, 2).unwrap();
        for y in 0..4 {
            for x in 0..4 {
                let mean_x = (2 * x) as f64 + 0.5;
                let mean_y = 3.0 * ((2 * y) as f64 + 0.5);
                let (dx, dy) = d.at(y, x);
                assert!((dx - 0.5 * mean_x).abs() < 1e-12);
                assert!((dy - 0.5 * mean_y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn downsample_rejects_indivisible() {
        assert!(downsample_flow(&FlowField::zeros(5, 4), 2).is_err());
        assert!(downsample_flow(&FlowField::zeros(4, 4), 0).is_err());
    }

    #[test]
    fn grid_rejects_bad_data() {
        assert!(FeatureGrid::from_vec(1, 2, 2, vec![0.0; 3]).is_err());
        assert!(FeatureGrid::from_vec(1, 1, 1, vec![f64::NAN]).is_err());
        assert!(FeatureGrid::from_vec(0, 1, 1, vec![]).is_err());
    }
}
