//! Compact vector observation: a cheaper alternative to pixels.
//!
//! Layout for a config with `k` alien columns:
//!
//! | slots            | content                                              |
//! |------------------|------------------------------------------------------|
//! | 0, 1             | P1 x / W, P2 x / W (−1 when there is no P2)          |
//! | 2 .. 2+3k        | per column: lowest live alien (x / W, y / H, alive)  |
//! | next 6           | 3 alien missiles nearest P1 as (x / W, y / H), −1 pad |
//! | next 2           | P1 / P2 own missile in flight (0 or 1)               |
//! | next 1           | lives / player_lives                                 |
//! | last             | mystery ship x / W, or −1                            |

use super::config::EnvConfig;
use super::state::{GameState, MissileOwner};

pub const NEAREST_MISSILES: usize = 3;
pub const ABSENT: f64 = -1.0;

pub fn feature_len(config: &EnvConfig) -> usize {
    2 + 3 * config.alien_cols + 2 * NEAREST_MISSILES + 2 + 1 + 1
}

/// Index of the lives slot, handy for tests and debugging.
pub fn lives_slot(config: &EnvConfig) -> usize {
    feature_len(config) - 2
}

pub fn features(state: &GameState) -> Vec<f64> {
    let c = &state.config;
    let w = f64::from(c.field_width);
    let h = f64::from(c.field_height);
    let mut v = Vec::with_capacity(feature_len(c));

    v.push(f64::from(state.p1.x) / w);
    v.push(state.p2.as_ref().map_or(ABSENT, |s| f64::from(s.x) / w));

    for col in 0..state.formation.cols {
        let (x, _) = state.alien_pos(0, col);
        let cx = (f64::from(x) + f64::from(c.alien_width) / 2.0) / w;
        match state.lowest_alive_in(col) {
            Some(row) => {
                let (_, y) = state.alien_pos(row, col);
                v.extend([cx, f64::from(y) / h, 1.0]);
            }
            None => v.extend([cx, 0.0, 0.0]),
        }
    }

    let p1x = state.ship_centre(&state.p1);
    let py = f64::from(c.player_y);
    let mut enemy: Vec<(f64, i32, i32)> = state
        .missiles
        .iter()
        .filter(|m| m.owner == MissileOwner::Alien)
        .map(|m| {
            let dx = f64::from(m.x) - p1x;
            let dy = f64::from(m.y) - py;
            (dx * dx + dy * dy, m.x, m.y)
        })
        .collect();
    enemy.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    for i in 0..NEAREST_MISSILES {
        match enemy.get(i) {
            Some(&(_, x, y)) => v.extend([f64::from(x) / w, f64::from(y) / h]),
            None => v.extend([ABSENT, ABSENT]),
        }
    }

    let flag = |b: bool| if b { 1.0 } else { 0.0 };
    v.push(flag(state.has_live_missile(MissileOwner::P1)));
    v.push(flag(state.has_live_missile(MissileOwner::P2)));
    v.push(f64::from(state.lives) / f64::from(c.player_lives));
    v.push(state.mystery.as_ref().map_or(ABSENT, |m| f64::from(m.x) / w));

    debug_assert_eq!(v.len(), feature_len(c));
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{Mystery, PlayerAction};

    #[test]
    fn reset_features() {
        let c = EnvConfig::default();
        let s = GameState::reset(&c, 42).unwrap();
        let f = features(&s);
        assert_eq!(f.len(), feature_len(&c));
        assert_eq!(f.len(), 42);
        assert_eq!(f[lives_slot(&c)], 1.0);
        assert_eq!(*f.last().unwrap(), ABSENT);
        assert_eq!(f[1], ABSENT);
    }

    #[test]
    fn dead_column_flag_is_zero() {
        let c = EnvConfig::default();
        let mut s = GameState::reset(&c, 42).unwrap();
        for row in 0..c.alien_rows {
            s.formation.alive[row * c.alien_cols + 3] = false;
        }
        let f = features(&s);
        assert_eq!(f[2 + 3 * 3 + 2], 0.0);
        assert_eq!(f[2 + 3 * 4 + 2], 1.0);
    }

    #[test]
    fn length_is_constant_across_modes_and_play() {
        let c = EnvConfig::two_player();
        let mut s = GameState::reset(&c, 5).unwrap();
        s.mystery = Some(Mystery { x: 40, dir: 1 });
        for _ in 0..200 {
            if s.done {
                break;
            }
            s.step(PlayerAction::Shoot, PlayerAction::Shoot).unwrap();
            assert_eq!(features(&s).len(), feature_len(&EnvConfig::default()));
        }
    }
}
