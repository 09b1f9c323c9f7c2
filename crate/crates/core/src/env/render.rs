//! Grayscale rendering and the downsampling used for pixel observations.

use super::state::{EnvError, GameState};

pub const BACKGROUND: f64 = 0.0;
pub const BUNKER: f64 = 0.4;
pub const MYSTERY: f64 = 0.5;
pub const ALIEN: f64 = 0.7;
pub const P2_SHIP: f64 = 0.8;
pub const MISSILE: f64 = 0.9;
pub const P1_SHIP: f64 = 1.0;

/// Side length of the network's square input frames.
pub const OBS_SIZE: usize = 84;

/// Row-major grayscale image with intensities in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

impl Frame {
    pub fn blank(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![BACKGROUND; width * height],
        }
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    fn fill_rect(&mut self, x: i32, y: i32, w: i32, h: i32, value: f64) {
        let x0 = x.max(0) as usize;
        let y0 = y.max(0) as usize;
        let x1 = (x + w).clamp(0, self.width as i32) as usize;
        let y1 = (y + h).clamp(0, self.height as i32) as usize;
        for row in y0..y1 {
            self.data[row * self.width + x0..row * self.width + x1.max(x0)].fill(value);
        }
    }
}

/// Draws the state with one fixed intensity per entity class. Later layers
/// overwrite earlier ones: bunkers, aliens, mystery ship, missiles, P2, P1.
/// A ship with no lives left is not drawn.
pub fn render_gray(state: &GameState) -> Frame {
    let c = &state.config;
    let mut frame = Frame::blank(c.field_width as usize, c.field_height as usize);
    let cp = c.bunker_cell_px;
    for b in &state.bunkers {
        for row in 0..b.rows {
            for col in 0..b.cols {
                if b.cells[row * b.cols + col] {
                    frame.fill_rect(
                        b.origin_x + col as i32 * cp,
                        b.origin_y + row as i32 * cp,
                        cp,
                        cp,
                        BUNKER,
                    );
                }
            }
        }
    }
    for row in 0..state.formation.rows {
        for col in 0..state.formation.cols {
            if state.is_alive(row, col) {
                let (x, y) = state.alien_pos(row, col);
                frame.fill_rect(x, y, c.alien_width, c.alien_height, ALIEN);
            }
        }
    }
    if let Some(m) = &state.mystery {
        frame.fill_rect(m.x, c.mystery_y, c.mystery_width, c.mystery_height, MYSTERY);
    }
    for m in &state.missiles {
        frame.fill_rect(m.x, m.y, 1, c.missile_height, MISSILE);
    }
    if let Some(p2) = &state.p2 {
        frame.fill_rect(p2.x, c.player_y, c.ship_width, c.ship_height, P2_SHIP);
    }
    if state.lives > 0 {
        frame.fill_rect(state.p1.x, c.player_y, c.ship_width, c.ship_height, P1_SHIP);
    }
    frame
}

/// Overlap-length weights mapping `src` cells onto `dst` cells along one axis,
/// normalised so each output cell is an average of the input it covers.
fn axis_weights(src: usize, dst: usize) -> Vec<Vec<(usize, f64)>> {
    let scale = src as f64 / dst as f64;
    (0..dst)
        .map(|o| {
            let lo = o as f64 * scale;
            let hi = (o + 1) as f64 * scale;
            let first = lo.floor() as usize;
            let last = (hi.ceil() as usize).min(src);
            (first..last)
                .filter_map(|i| {
                    let overlap = (hi.min(i as f64 + 1.0) - lo.max(i as f64)).max(0.0);
                    (overlap > 0.0).then_some((i, overlap / scale))
                })
                .collect()
        })
        .collect()
}

/// Area-weighted downsample of a full-field frame to `OBS_SIZE x OBS_SIZE`.
pub fn preprocess(frame: &Frame, expected_w: usize, expected_h: usize) -> Result<Frame, EnvError> {
    if frame.width != expected_w || frame.height != expected_h || frame.data.len() != expected_w * expected_h {
        return Err(EnvError::Dimension {
            expected_w,
            expected_h,
            got_w: frame.width,
            got_h: frame.height,
        });
    }
    let wx = axis_weights(frame.width, OBS_SIZE);
    let wy = axis_weights(frame.height, OBS_SIZE);

    // Horizontal pass: height x OBS_SIZE.
    let mut tmp = vec![0.0; frame.height * OBS_SIZE];
    for y in 0..frame.height {
        let src = &frame.data[y * frame.width..(y + 1) * frame.width];
        for (ox, weights) in wx.iter().enumerate() {
            tmp[y * OBS_SIZE + ox] = weights.iter().map(|&(i, w)| src[i] * w).sum();
        }
    }
    let mut out = Frame::blank(OBS_SIZE, OBS_SIZE);
    for (oy, weights) in wy.iter().enumerate() {
        for ox in 0..OBS_SIZE {
            let v: f64 = weights.iter().map(|&(i, w)| tmp[i * OBS_SIZE + ox] * w).sum();
            out.data[oy * OBS_SIZE + ox] = v.clamp(0.0, 1.0);
        }
    }
    Ok(out)
}

/// Renders and downsamples in one go.
pub fn observe_pixels(state: &GameState) -> Frame {
    let c = &state.config;
    preprocess(&render_gray(state), c.field_width as usize, c.field_height as usize)
        .expect("rendered frame always matches the field size")
}
