use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::action::{ActionError, JointAction, PlayerAction};
use super::config::EnvConfig;
use crate::error::ConfigError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnvError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Action(#[from] ActionError),
    #[error("illegal transition: the episode has already finished")]
    Finished,
    #[error("expected a {expected_w}x{expected_h} frame, got {got_w}x{got_h}")]
    Dimension {
        expected_w: usize,
        expected_h: usize,
        got_w: usize,
        got_h: usize,
    },
}

/// One of the two player ships.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Shooter {
    P1,
    P2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MissileOwner {
    P1,
    P2,
    Alien,
}

impl From<Shooter> for MissileOwner {
    fn from(s: Shooter) -> Self {
        match s {
            Shooter::P1 => Self::P1,
            Shooter::P2 => Self::P2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Win,
    LossLives,
    LossInvasion,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Win => "Win",
            Self::LossLives => "LossLives",
            Self::LossInvasion => "LossInvasion",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ship {
    /// Left edge.
    pub x: i32,
    pub cooldown: u32,
    /// Frames of remaining post-hit invulnerability (only meaningful for P1).
    pub invulnerable: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Missile {
    pub owner: MissileOwner,
    pub x: i32,
    /// Top edge.
    pub y: i32,
    pub vy: i32,
}

/// The alien grid. Alien `(row, col)` has its top-left corner at
/// `origin + (col * spacing_x, row * spacing_y)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Formation {
    pub origin_x: i32,
    pub origin_y: i32,
    pub rows: usize,
    pub cols: usize,
    /// Row-major alive flags.
    pub alive: Vec<bool>,
    pub dir: i32,
    pub move_interval: u32,
    pub move_countdown: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bunker {
    pub origin_x: i32,
    pub origin_y: i32,
    pub rows: usize,
    pub cols: usize,
    /// Row-major intact flags.
    pub cells: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mystery {
    pub x: i32,
    pub dir: i32,
}

/// Live-alien bounding box, right and bottom exclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundingBox {
    pub left: i32,
    pub top: i32,
    pub right: i32,
    pub bottom: i32,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StepEvent {
    /// `alien_x` and `player_x` are horizontal centres; `player_x` is always
    /// player 1's ship, whoever fired.
    AlienKilled {
        killer: Shooter,
        alien_x: f64,
        player_x: f64,
    },
    MysteryKilled {
        killer: Shooter,
        mystery_x: f64,
        player_x: f64,
    },
    PlayerLifeLost,
    GameWon,
    GameLost,
}

/// Ordered events produced by a single frame.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepEvents {
    pub events: Vec<StepEvent>,
}

impl StepEvents {
    pub fn new(events: Vec<StepEvent>) -> Self {
        Self { events }
    }

    pub fn iter(&self) -> std::slice::Iter<'_, StepEvent> {
        self.events.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn kills_by(&self, shooter: Shooter) -> usize {
        self.events
            .iter()
            .filter(|e| {
                matches!(e, StepEvent::AlienKilled { killer, .. }
                    | StepEvent::MysteryKilled { killer, .. } if *killer == shooter)
            })
            .count()
    }
}

/// Full simulation state. Cloning it forks the game, RNG included.
#[derive(Debug, Clone, PartialEq)]
pub struct GameState {
    pub config: EnvConfig,
    pub frame: u64,
    pub score: u32,
    pub lives: u32,
    pub p1: Ship,
    pub p2: Option<Ship>,
    pub formation: Formation,
    pub missiles: Vec<Missile>,
    pub bunkers: Vec<Bunker>,
    pub mystery: Option<Mystery>,
    pub rng: ChaCha8Rng,
    pub done: bool,
    pub outcome: Option<Outcome>,
}

impl GameState {
    pub fn reset(config: &EnvConfig, seed: u64) -> Result<Self, EnvError> {
        config.validate()?;
        let c = config;
        let formation = Formation {
            origin_x: (c.field_width - c.grid_width()) / 2,
            origin_y: c.alien_top,
            rows: c.alien_rows,
            cols: c.alien_cols,
            alive: vec![true; c.alien_rows * c.alien_cols],
            dir: 1,
            move_interval: c.move_interval_base,
            move_countdown: c.move_interval_base,
        };
        let bunkers = (0..c.bunker_count)
            .map(|i| {
                let centre = c.field_width * (2 * i as i32 + 1) / (2 * c.bunker_count as i32);
                Bunker {
                    origin_x: centre - c.bunker_width() / 2,
                    origin_y: c.bunker_y,
                    rows: c.bunker_rows,
                    cols: c.bunker_cols,
                    cells: vec![true; c.bunker_rows * c.bunker_cols],
                }
            })
            .collect();
        let ship_at = |x: i32| Ship {
            x,
            cooldown: 0,
            invulnerable: 0,
        };
        Ok(Self {
            config: c.clone(),
            frame: 0,
            score: 0,
            lives: c.player_lives,
            p1: ship_at(c.field_width / 4 - c.ship_width / 2),
            p2: c.two_player.then(|| ship_at(3 * c.field_width / 4 - c.ship_width / 2)),
            formation,
            missiles: Vec::new(),
            bunkers,
            mystery: None,
            rng: ChaCha8Rng::seed_from_u64(seed),
            done: false,
            outcome: None,
        })
    }

    /// PLE-style single-code step for the two-player game.
    pub fn step_joint(&mut self, action: JointAction) -> Result<StepEvents, EnvError> {
        let (a, b) = action.decode();
        self.step(a, b)
    }

    /// Advance exactly one frame. `second` is ignored in single-player games.
    pub fn step(&mut self, first: PlayerAction, second: PlayerAction) -> Result<StepEvents, EnvError> {
        if self.done {
            return Err(EnvError::Finished);
        }
        self.frame += 1;
        let mut events = StepEvents::default();

        self.act(Shooter::P1, first);
        if self.p2.is_some() {
            self.act(Shooter::P2, second);
        }
        self.advance_missiles();
        self.advance_formation();
        self.resolve_missiles(&mut events);
        self.erode_bunkers_under_aliens();
        self.alien_fire();
        self.advance_mystery();
        self.check_end(&mut events);
        Ok(events)
    }

    pub fn alive_count(&self) -> usize {
        self.formation.alive.iter().filter(|&&a| a).count()
    }

    /// Top-left corner of alien `(row, col)`, dead or alive.
    pub fn alien_pos(&self, row: usize, col: usize) -> (i32, i32) {
        let c = &self.config;
        (
            self.formation.origin_x + col as i32 * c.alien_spacing_x,
            self.formation.origin_y + row as i32 * c.alien_spacing_y,
        )
    }

    pub fn is_alive(&self, row: usize, col: usize) -> bool {
        self.formation.alive[row * self.formation.cols + col]
    }

    pub fn live_bbox(&self) -> Option<BoundingBox> {
        let f = &self.formation;
        let mut bbox: Option<(usize, usize, usize, usize)> = None;
        for r in 0..f.rows {
            for c in 0..f.cols {
                if f.alive[r * f.cols + c] {
                    bbox = Some(match bbox {
                        None => (c, r, c, r),
                        Some((c0, r0, c1, r1)) => (c0.min(c), r0.min(r), c1.max(c), r1.max(r)),
                    });
                }
            }
        }
        let (c0, r0, c1, r1) = bbox?;
        let (left, top) = self.alien_pos(r0, c0);
        let (right, bottom) = self.alien_pos(r1, c1);
        Some(BoundingBox {
            left,
            top,
            right: right + self.config.alien_width,
            bottom: bottom + self.config.alien_height,
        })
    }

    /// Lowest live alien in a column, as a row index.
    pub fn lowest_alive_in(&self, col: usize) -> Option<usize> {
        (0..self.formation.rows).rev().find(|&r| self.is_alive(r, col))
    }

    pub fn ship(&self, who: Shooter) -> Option<&Ship> {
        match who {
            Shooter::P1 => Some(&self.p1),
            Shooter::P2 => self.p2.as_ref(),
        }
    }

    pub fn ship_centre(&self, ship: &Ship) -> f64 {
        f64::from(ship.x) + f64::from(self.config.ship_width) / 2.0
    }

    pub fn has_live_missile(&self, owner: MissileOwner) -> bool {
        self.missiles.iter().any(|m| m.owner == owner)
    }

    fn act(&mut self, who: Shooter, action: PlayerAction) {
        let c = &self.config;
        let has_missile = self.missiles.iter().any(|m| m.owner == who.into());
        let ship = match who {
            Shooter::P1 => &mut self.p1,
            Shooter::P2 => match self.p2.as_mut() {
                Some(s) => s,
                None => return,
            },
        };
        ship.cooldown = ship.cooldown.saturating_sub(1);
        ship.invulnerable = ship.invulnerable.saturating_sub(1);
        match action {
            PlayerAction::Left => ship.x = (ship.x - c.player_speed).max(0),
            PlayerAction::Right => ship.x = (ship.x + c.player_speed).min(c.field_width - c.ship_width),
            PlayerAction::Shoot => {
                if ship.cooldown == 0 && !has_missile {
                    ship.cooldown = c.shoot_cooldown;
                    let m = Missile {
                        owner: who.into(),
                        x: ship.x + c.ship_width / 2,
                        y: c.player_y - c.missile_height,
                        vy: -c.missile_speed,
                    };
                    self.missiles.push(m);
                }
            }
            PlayerAction::Noop => {}
        }
    }

    fn advance_missiles(&mut self) {
        let (h, mh) = (self.config.field_height, self.config.missile_height);
        for m in &mut self.missiles {
            m.y += m.vy;
        }
        self.missiles.retain(|m| m.y + mh > 0 && m.y < h);
    }

    fn advance_formation(&mut self) {
        let f = &mut self.formation;
        f.move_countdown = f.move_countdown.saturating_sub(1);
        if f.move_countdown > 0 {
            return;
        }
        f.move_countdown = f.move_interval;
        let Some(bbox) = self.live_bbox() else {
            return;
        };
        let c = &self.config;
        let f = &mut self.formation;
        let hits_right = f.dir > 0 && bbox.right + c.alien_step_px > c.field_width;
        let hits_left = f.dir < 0 && bbox.left - c.alien_step_px < 0;
        if hits_right || hits_left {
            f.dir = -f.dir;
            f.origin_y += c.alien_descend_px;
        } else {
            f.origin_x += f.dir * c.alien_step_px;
        }
    }

    fn resolve_missiles(&mut self, events: &mut StepEvents) {
        let missiles = std::mem::take(&mut self.missiles);
        let mut kept = Vec::with_capacity(missiles.len());
        for m in missiles {
            let consumed = match m.owner {
                MissileOwner::P1 => self.player_missile_hits(Shooter::P1, &m, events),
                MissileOwner::P2 => self.player_missile_hits(Shooter::P2, &m, events),
                MissileOwner::Alien => self.alien_missile_hits(&m, events),
            };
            if !consumed {
                kept.push(m);
            }
        }
        self.missiles = kept;
    }

    fn player_missile_hits(&mut self, killer: Shooter, m: &Missile, events: &mut StepEvents) -> bool {
        let c = self.config.clone();
        let (my0, my1) = (m.y, m.y + c.missile_height);
        let player_x = self.ship_centre(&self.p1);

        // Aliens: the lowest overlapping alien in the missile's column dies.
        for col in 0..self.formation.cols {
            let (ax, _) = self.alien_pos(0, col);
            if m.x < ax || m.x >= ax + c.alien_width {
                continue;
            }
            for row in (0..self.formation.rows).rev() {
                let (_, ay) = self.alien_pos(row, col);
                if self.is_alive(row, col) && my0 < ay + c.alien_height && ay < my1 {
                    self.formation.alive[row * self.formation.cols + col] = false;
                    self.score += c.alien_points;
                    let dead = (self.formation.alive.len() - self.alive_count()) as u32;
                    self.formation.move_interval =
                        c.move_interval_base.saturating_sub(dead / 10).max(c.move_interval_min);
                    events.events.push(StepEvent::AlienKilled {
                        killer,
                        alien_x: f64::from(ax) + f64::from(c.alien_width) / 2.0,
                        player_x,
                    });
                    return true;
                }
            }
        }

        if let Some(ms) = &self.mystery {
            let (x0, y0) = (ms.x, c.mystery_y);
            if m.x >= x0 && m.x < x0 + c.mystery_width && my0 < y0 + c.mystery_height && y0 < my1 {
                let mystery_x = f64::from(x0) + f64::from(c.mystery_width) / 2.0;
                self.mystery = None;
                self.score += c.mystery_points;
                events.events.push(StepEvent::MysteryKilled {
                    killer,
                    mystery_x,
                    player_x,
                });
                return true;
            }
        }

        // Upward shots erode bunkers from the bottom.
        self.erode_bunker(m.x, my0, my1, true)
    }

    fn alien_missile_hits(&mut self, m: &Missile, events: &mut StepEvents) -> bool {
        let c = &self.config;
        let (my0, my1) = (m.y, m.y + c.missile_height);
        // Downward shots erode bunkers from the top.
        if self.erode_bunker(m.x, my0, my1, false) {
            return true;
        }
        let c = &self.config;
        let p1 = &mut self.p1;
        let overlaps = self.lives > 0
            && m.x >= p1.x
            && m.x < p1.x + c.ship_width
            && my0 < c.player_y + c.ship_height
            && c.player_y < my1;
        if overlaps && p1.invulnerable == 0 {
            self.lives -= 1;
            p1.invulnerable = c.respawn_invulnerable_frames;
            events.events.push(StepEvent::PlayerLifeLost);
            return true;
        }
        // The assistant ship ignores enemy fire entirely.
        false
    }

    /// Destroys the first intact cell struck by a one-pixel-wide missile
    /// spanning `[y0, y1)` at column `x`. Upward missiles meet the lowest
    /// overlapping cell first, downward ones the highest.
    fn erode_bunker(&mut self, x: i32, y0: i32, y1: i32, upward: bool) -> bool {
        let cp = self.config.bunker_cell_px;
        for b in &mut self.bunkers {
            if x < b.origin_x || x >= b.origin_x + b.cols as i32 * cp {
                continue;
            }
            let col = ((x - b.origin_x) / cp) as usize;
            let mut rows: Vec<usize> = (0..b.rows).collect();
            if upward {
                rows.reverse();
            }
            for row in rows {
                let cy = b.origin_y + row as i32 * cp;
                let idx = row * b.cols + col;
                if b.cells[idx] && y0 < cy + cp && cy < y1 {
                    b.cells[idx] = false;
                    return true;
                }
            }
        }
        false
    }

    fn erode_bunkers_under_aliens(&mut self) {
        let Some(bbox) = self.live_bbox() else {
            return;
        };
        let c = self.config.clone();
        if self.bunkers.iter().all(|b| bbox.bottom <= b.origin_y) {
            return;
        }
        let mut rects = Vec::new();
        for r in 0..self.formation.rows {
            for col in 0..self.formation.cols {
                if self.is_alive(r, col) {
                    let (x, y) = self.alien_pos(r, col);
                    rects.push((x, y));
                }
            }
        }
        let cp = c.bunker_cell_px;
        for b in &mut self.bunkers {
            for row in 0..b.rows {
                for col in 0..b.cols {
                    let cx = b.origin_x + col as i32 * cp;
                    let cy = b.origin_y + row as i32 * cp;
                    let idx = row * b.cols + col;
                    if b.cells[idx]
                        && rects.iter().any(|&(ax, ay)| {
                            cx < ax + c.alien_width && ax < cx + cp && cy < ay + c.alien_height && ay < cy + cp
                        })
                    {
                        b.cells[idx] = false;
                    }
                }
            }
        }
    }

    fn alien_fire(&mut self) {
        let roll: f64 = self.rng.gen();
        let in_flight = self.missiles.iter().filter(|m| m.owner == MissileOwner::Alien).count();
        if roll >= self.config.alien_fire_prob || in_flight >= self.config.max_alien_missiles {
            return;
        }
        let live_cols: Vec<usize> = (0..self.formation.cols)
            .filter(|&c| self.lowest_alive_in(c).is_some())
            .collect();
        if live_cols.is_empty() {
            return;
        }
        let col = live_cols[self.rng.gen_range(0..live_cols.len())];
        let row = self.lowest_alive_in(col).expect("column has a live alien");
        let (x, y) = self.alien_pos(row, col);
        let c = &self.config;
        self.missiles.push(Missile {
            owner: MissileOwner::Alien,
            x: x + c.alien_width / 2,
            y: y + c.alien_height,
            vy: c.alien_missile_speed,
        });
    }

    fn advance_mystery(&mut self) {
        let c = &self.config;
        match &mut self.mystery {
            Some(m) => {
                m.x += m.dir * c.mystery_speed;
                if m.x + c.mystery_width <= 0 || m.x >= c.field_width {
                    self.mystery = None;
                }
            }
            None => {
                let roll: f64 = self.rng.gen();
                if roll < c.mystery_prob {
                    let rightwards: bool = self.rng.gen();
                    self.mystery = Some(if rightwards {
                        Mystery {
                            x: -c.mystery_width,
                            dir: 1,
                        }
                    } else {
                        Mystery {
                            x: c.field_width,
                            dir: -1,
                        }
                    });
                }
            }
        }
    }

    fn check_end(&mut self, events: &mut StepEvents) {
        let outcome = match self.live_bbox() {
            None => Outcome::Win,
            Some(_) if self.lives == 0 => Outcome::LossLives,
            Some(b) if b.bottom >= self.config.player_y => Outcome::LossInvasion,
            Some(_) => return,
        };
        self.done = true;
        self.outcome = Some(outcome);
        events.events.push(match outcome {
            Outcome::Win => StepEvent::GameWon,
            _ => StepEvent::GameLost,
        });
    }
}
