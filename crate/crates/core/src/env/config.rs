use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

/// Geometry, timing and scoring constants of the simulated game.
///
/// All positions are logical pixels with the origin at the top-left corner
/// of the playfield; `y` grows downwards.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvConfig {
    pub field_width: i32,
    pub field_height: i32,

    pub alien_rows: usize,
    pub alien_cols: usize,
    pub alien_width: i32,
    pub alien_height: i32,
    pub alien_spacing_x: i32,
    pub alien_spacing_y: i32,
    /// Top edge of the first alien row at reset.
    pub alien_top: i32,
    pub alien_step_px: i32,
    pub alien_descend_px: i32,
    pub move_interval_base: u32,
    pub move_interval_min: u32,
    pub alien_fire_prob: f64,
    pub max_alien_missiles: usize,
    pub alien_missile_speed: i32,

    pub ship_width: i32,
    pub ship_height: i32,
    /// Top edge of both player ships.
    pub player_y: i32,
    pub player_speed: i32,
    pub missile_speed: i32,
    pub missile_height: i32,
    pub shoot_cooldown: u32,
    pub respawn_invulnerable_frames: u32,

    pub bunker_count: usize,
    pub bunker_rows: usize,
    pub bunker_cols: usize,
    pub bunker_cell_px: i32,
    pub bunker_y: i32,

    pub mystery_prob: f64,
    pub mystery_points: u32,
    pub mystery_width: i32,
    pub mystery_height: i32,
    pub mystery_y: i32,
    pub mystery_speed: i32,

    pub alien_points: u32,
    pub player_lives: u32,
    pub two_player: bool,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            field_width: 160,
            field_height: 192,
            alien_rows: 6,
            alien_cols: 10,
            alien_width: 8,
            alien_height: 6,
            alien_spacing_x: 12,
            alien_spacing_y: 10,
            alien_top: 20,
            alien_step_px: 2,
            alien_descend_px: 6,
            move_interval_base: 6,
            move_interval_min: 1,
            alien_fire_prob: 0.02,
            max_alien_missiles: 3,
            alien_missile_speed: 2,
            ship_width: 8,
            ship_height: 5,
            player_y: 176,
            player_speed: 2,
            missile_speed: 4,
            missile_height: 4,
            shoot_cooldown: 15,
            respawn_invulnerable_frames: 60,
            bunker_count: 4,
            bunker_rows: 4,
            bunker_cols: 8,
            bunker_cell_px: 2,
            bunker_y: 150,
            mystery_prob: 0.002,
            mystery_points: 100,
            mystery_width: 12,
            mystery_height: 5,
            mystery_y: 8,
            mystery_speed: 1,
            alien_points: 30,
            player_lives: 5,
            two_player: false,
        }
    }
}

impl EnvConfig {
    pub fn two_player() -> Self {
        Self {
            two_player: true,
            ..Self::default()
        }
    }

    /// Width of the full alien grid from the left edge of column 0 to the
    /// right edge of the last column.
    pub fn grid_width(&self) -> i32 {
        (self.alien_cols as i32 - 1) * self.alien_spacing_x + self.alien_width
    }

    pub fn grid_height(&self) -> i32 {
        (self.alien_rows as i32 - 1) * self.alien_spacing_y + self.alien_height
    }

    /// Largest horizontal distance two ships (or a ship and an enemy of the
    /// same width) can be apart.
    pub fn max_distance(&self) -> f64 {
        f64::from(self.field_width - self.ship_width)
    }

    pub fn bunker_width(&self) -> i32 {
        self.bunker_cols as i32 * self.bunker_cell_px
    }

    pub fn bunker_height(&self) -> i32 {
        self.bunker_rows as i32 * self.bunker_cell_px
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        fn positive(name: &'static str, v: i64) -> Result<(), ConfigError> {
            if v <= 0 {
                return Err(ConfigError::new(name, format!("must be > 0, got {v}")));
            }
            Ok(())
        }
        fn probability(name: &'static str, p: f64) -> Result<(), ConfigError> {
            if !(0.0..=1.0).contains(&p) {
                return Err(ConfigError::new(name, format!("must lie in [0, 1], got {p}")));
            }
            Ok(())
        }

        positive("field_width", self.field_width.into())?;
        positive("field_height", self.field_height.into())?;
        positive("alien_rows", self.alien_rows as i64)?;
        positive("alien_cols", self.alien_cols as i64)?;
        positive("alien_width", self.alien_width.into())?;
        positive("alien_height", self.alien_height.into())?;
        positive("alien_spacing_x", self.alien_spacing_x.into())?;
        positive("alien_spacing_y", self.alien_spacing_y.into())?;
        positive("alien_step_px", self.alien_step_px.into())?;
        positive("alien_descend_px", self.alien_descend_px.into())?;
        positive("move_interval_base", self.move_interval_base.into())?;
        positive("move_interval_min", self.move_interval_min.into())?;
        positive("alien_missile_speed", self.alien_missile_speed.into())?;
        positive("ship_width", self.ship_width.into())?;
        positive("ship_height", self.ship_height.into())?;
        positive("player_speed", self.player_speed.into())?;
        positive("missile_speed", self.missile_speed.into())?;
        positive("missile_height", self.missile_height.into())?;
        positive("bunker_rows", self.bunker_rows as i64)?;
        positive("bunker_cols", self.bunker_cols as i64)?;
        positive("bunker_cell_px", self.bunker_cell_px.into())?;
        positive("mystery_width", self.mystery_width.into())?;
        positive("mystery_height", self.mystery_height.into())?;
        positive("mystery_speed", self.mystery_speed.into())?;
        positive("alien_points", self.alien_points.into())?;
        positive("player_lives", self.player_lives.into())?;
        probability("alien_fire_prob", self.alien_fire_prob)?;
        probability("mystery_prob", self.mystery_prob)?;

        if self.alien_spacing_x < self.alien_width {
            return Err(ConfigError::new("alien_spacing_x", "aliens would overlap horizontally"));
        }
        if self.alien_spacing_y < self.alien_height {
            return Err(ConfigError::new("alien_spacing_y", "aliens would overlap vertically"));
        }
        if self.move_interval_min > self.move_interval_base {
            return Err(ConfigError::new(
                "move_interval_min",
                "must not exceed move_interval_base",
            ));
        }
        if self.grid_width() + 2 * self.alien_step_px > self.field_width {
            return Err(ConfigError::new(
                "alien_cols",
                format!(
                    "alien grid ({} px) plus one formation step each side does not fit in field_width {}",
                    self.grid_width(),
                    self.field_width
                ),
            ));
        }
        if self.alien_top < 0 || self.alien_top + self.grid_height() >= self.player_y {
            return Err(ConfigError::new(
                "alien_rows",
                "alien grid must start inside the field and above the player row",
            ));
        }
        if self.player_y < 0 || self.player_y + self.ship_height > self.field_height {
            return Err(ConfigError::new("player_y", "player ships must lie inside the field"));
        }
        if self.ship_width > self.field_width {
            return Err(ConfigError::new("ship_width", "ship wider than the field"));
        }
        if self.bunker_count > 0 {
            let slot = self.field_width / self.bunker_count as i32;
            if self.bunker_width() > slot {
                return Err(ConfigError::new(
                    "bunker_count",
                    "bunkers do not fit side by side in the field",
                ));
            }
            if self.bunker_y < 0 || self.bunker_y + self.bunker_height() > self.player_y {
                return Err(ConfigError::new("bunker_y", "bunkers must sit above the player row"));
            }
        }
        if self.mystery_y < 0 || self.mystery_y + self.mystery_height > self.field_height {
            return Err(ConfigError::new("mystery_y", "mystery ship row outside the field"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        EnvConfig::default().validate().unwrap();
        EnvConfig::two_player().validate().unwrap();
    }

    #[test]
    fn full_clear_lands_near_winning_band() {
        let c = EnvConfig::default();
        let total = c.alien_points as usize * c.alien_rows * c.alien_cols;
        assert!((1600..=2000).contains(&total), "{total}");
        assert_eq!(c.player_lives, 5);
    }

    #[test]
    fn zero_columns_rejected() {
        let c = EnvConfig {
            alien_cols: 0,
            ..EnvConfig::default()
        };
        let err = c.validate().unwrap_err();
        assert_eq!(err.field, "alien_cols");
    }

    #[test]
    fn grid_without_margin_rejected() {
        let c = EnvConfig {
            alien_cols: 14,
            ..EnvConfig::default()
        };
        assert_eq!(c.validate().unwrap_err().field, "alien_cols");
    }

    #[test]
    fn bad_probability_rejected() {
        let c = EnvConfig {
            alien_fire_prob: 1.5,
            ..EnvConfig::default()
        };
        assert_eq!(c.validate().unwrap_err().field, "alien_fire_prob");
    }
}
