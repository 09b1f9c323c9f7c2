use super::action::PlayerAction;
use super::state::{GameState, MissileOwner, Shooter, StepEvent};

/// Frames a shot is followed for before it counts as a miss.
const LOOKAHEAD: usize = 64;

/// A scripted player 1 for debugging and demos. It fires only when a
/// look-ahead on a cloned state shows the shot killing an alien, and
/// otherwise walks towards the nearest column holding a bottom-row alien,
/// which keeps flights short and the formation's lower edge high.
pub fn autopilot_action(state: &GameState) -> PlayerAction {
    if !state.has_live_missile(MissileOwner::P1) && state.p1.cooldown <= 1 && shot_lands(state) {
        return PlayerAction::Shoot;
    }
    let c = &state.config;
    let centre = state.ship_centre(&state.p1);
    let columns: Vec<(usize, usize)> = (0..state.formation.cols)
        .filter_map(|col| state.lowest_alive_in(col).map(|row| (col, row)))
        .collect();
    let bottom = columns.iter().map(|&(_, row)| row).max();
    let target = columns
        .iter()
        .filter(|&&(_, row)| Some(row) == bottom)
        .map(|&(col, row)| {
            let (ax, ay) = state.alien_pos(row, col);
            // Lead the target by the formation's drift during the flight.
            let flight = f64::from(c.player_y - c.missile_height - ay - c.alien_height) / f64::from(c.missile_speed);
            let drift = f64::from(state.formation.dir * c.alien_step_px) * flight
                / f64::from(state.formation.move_interval.max(1));
            f64::from(ax) + f64::from(c.alien_width) / 2.0 + drift
        })
        .min_by(|a, b| (a - centre).abs().total_cmp(&(b - centre).abs()));
    match target {
        Some(x) if x < centre - 1.0 => PlayerAction::Left,
        Some(x) if x > centre + 1.0 => PlayerAction::Right,
        _ => PlayerAction::Noop,
    }
}

fn shot_lands(state: &GameState) -> bool {
    let mut probe = state.clone();
    let mut action = PlayerAction::Shoot;
    for _ in 0..LOOKAHEAD {
        let Ok(events) = probe.step(action, PlayerAction::Noop) else {
            return false;
        };
        if events.iter().any(|e| {
            matches!(
                e,
                StepEvent::AlienKilled {
                    killer: Shooter::P1,
                    ..
                }
            )
        }) {
            return true;
        }
        if action == PlayerAction::Shoot && !probe.has_live_missile(MissileOwner::P1) {
            return false;
        }
        action = PlayerAction::Noop;
        if !probe.has_live_missile(MissileOwner::P1) {
            return false;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{EnvConfig, Outcome};

    #[test]
    fn clears_a_quiet_wave() {
        let config = EnvConfig {
            alien_fire_prob: 0.0,
            mystery_prob: 0.0,
            ..EnvConfig::default()
        };
        let mut s = GameState::reset(&config, 5).unwrap();
        while !s.done {
            let a = autopilot_action(&s);
            s.step(a, PlayerAction::Noop).unwrap();
        }
        assert_eq!(s.outcome, Some(Outcome::Win));
        assert_eq!(s.score, 1800);
    }
}
