//! Four small grid-world puzzles with a shared seven-action interface:
//! turn left/right, move forward, pick up, drop, toggle, and a no-op.
//! Layouts are drawn once from a layout stream and frozen; each reset
//! redraws only the agent's spawn cell and facing. The full environment
//! state (agent pose, carried or placed objects, door openness) is encoded
//! injectively into a dense table index via a mixed-radix code.

use std::sync::Arc;

use rand::Rng as _;

use super::{EnvError, EnvStep, Environment};
use crate::seeding::Rng;

pub const GRID_ACTION_COUNT: usize = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridAction {
    TurnLeft,
    TurnRight,
    Forward,
    Pickup,
    Drop,
    Toggle,
    Done,
}

impl GridAction {
    pub const ALL: [GridAction; GRID_ACTION_COUNT] = [
        GridAction::TurnLeft,
        GridAction::TurnRight,
        GridAction::Forward,
        GridAction::Pickup,
        GridAction::Drop,
        GridAction::Toggle,
        GridAction::Done,
    ];

    pub fn from_index(index: usize) -> Option<GridAction> {
        GridAction::ALL.get(index).copied()
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            GridAction::TurnLeft => "turn-left",
            GridAction::TurnRight => "turn-right",
            GridAction::Forward => "forward",
            GridAction::Pickup => "pickup",
            GridAction::Drop => "drop",
            GridAction::Toggle => "toggle",
            GridAction::Done => "done",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridKind {
    /// A locked door splits the grid; the key lies on the spawn side and
    /// the goal square waits on the far side.
    DoorKey,
    /// A row of rooms joined by closed (unlocked) doors; the goal square
    /// sits in the last room.
    MultiRoom,
    /// A central corridor flanked by rooms; a key hidden in one of the
    /// right rooms opens the locked left room holding the target ball.
    KeyCorridor,
    /// Two rooms; the locked connecting door is blocked by a movable
    /// obstacle and the key hides inside a box.
    ObstructedMaze,
}

impl GridKind {
    pub const ALL: [GridKind; 4] = [
        GridKind::DoorKey,
        GridKind::MultiRoom,
        GridKind::KeyCorridor,
        GridKind::ObstructedMaze,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GridKind::DoorKey => "door-key",
            GridKind::MultiRoom => "multi-room",
            GridKind::KeyCorridor => "key-corridor",
            GridKind::ObstructedMaze => "obstructed-maze",
        }
    }

    pub fn parse(name: &str) -> Option<GridKind> {
        match name {
            "door-key" | "doorkey" => Some(GridKind::DoorKey),
            "multi-room" | "multiroom" => Some(GridKind::MultiRoom),
            "key-corridor" | "keycorridor" => Some(GridKind::KeyCorridor),
            "obstructed-maze" | "obstructedmaze" => Some(GridKind::ObstructedMaze),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    pub kind: GridKind,
    pub width: usize,
    pub height: usize,
    /// Steps after which an unsolved episode is truncated.
    pub max_steps: u32,
}

impl GridConfig {
    /// The documented default layout dimensions for a kind, with the step
    /// cap set to four times the cell count.
    pub fn default_for(kind: GridKind) -> GridConfig {
        let (width, height) = match kind {
            GridKind::DoorKey => (6, 6),
            GridKind::MultiRoom => (10, 4),
            GridKind::KeyCorridor => (9, 7),
            GridKind::ObstructedMaze => (7, 5),
        };
        GridConfig {
            kind,
            width,
            height,
            max_steps: (4 * width * height) as u32,
        }
    }

    /// Default dimensions for a kind with a custom step cap.
    pub fn sized(kind: GridKind, width: usize, height: usize) -> GridConfig {
        GridConfig {
            kind,
            width,
            height,
            max_steps: (4 * width * height) as u32,
        }
    }
}

/// Reward paid on solving a puzzle at a given step count: a full point for
/// an instant solve, decaying linearly to a tenth at the step cap.
pub fn success_reward(step_count: u32, max_steps: u32) -> f64 {
    1.0 - 0.9 * (step_count as f64 / max_steps as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Cell {
    Wall,
    Floor,
    Goal,
    Door(u8),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct DoorInfo {
    raw: usize,
    locked: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum KeyHome {
    Floor(usize),
    InBox,
}

/// Immutable per-instance geometry, shared cheaply across clones.
#[derive(Debug)]
struct Layout {
    kind: GridKind,
    width: usize,
    height: usize,
    cells: Vec<Cell>,
    doors: Vec<DoorInfo>,
    /// Dense walkable-cell index -> raw cell index.
    free_cells: Vec<usize>,
    /// Raw cell index -> dense walkable-cell index.
    free_index: Vec<Option<usize>>,
    key_home: Option<KeyHome>,
    /// Walkable-cell index of the key box, present only with `KeyHome::InBox`.
    box_cell: Option<usize>,
    obstacle_home: Option<usize>,
    target_ball: Option<usize>,
    spawns: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum KeyState {
    InBox,
    At(usize),
    Carried,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ObstacleState {
    At(usize),
    Carried,
}

/// Where a movable object currently is, in grid coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjectPlace {
    Carried,
    InBox,
    At(usize, usize),
}

/// A decoded environment state, for inspection and debugging.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridStateView {
    pub agent: (usize, usize),
    /// Facing: 0 east, 1 south, 2 west, 3 north.
    pub dir: usize,
    pub key: Option<ObjectPlace>,
    pub obstacle: Option<ObjectPlace>,
    pub doors_open: Vec<bool>,
}

#[derive(Debug, Clone)]
pub struct GridWorld {
    config: GridConfig,
    layout: Arc<Layout>,
    agent_free: usize,
    dir: usize,
    key: Option<KeyState>,
    obstacle: Option<ObstacleState>,
    door_open: Vec<bool>,
    steps: u32,
    started: bool,
    finished: bool,
}

struct LayoutBuilder {
    width: usize,
    cells: Vec<Cell>,
    doors: Vec<DoorInfo>,
}

impl LayoutBuilder {
    fn walls(width: usize, height: usize) -> LayoutBuilder {
        LayoutBuilder {
            width,
            cells: vec![Cell::Wall; width * height],
            doors: Vec::new(),
        }
    }

    fn raw(&self, x: usize, y: usize) -> usize {
        y * self.width + x
    }

    fn set(&mut self, x: usize, y: usize, cell: Cell) {
        let raw = self.raw(x, y);
        self.cells[raw] = cell;
    }

    fn carve(&mut self, x0: usize, x1: usize, y0: usize, y1: usize) {
        for y in y0..=y1 {
            for x in x0..=x1 {
                self.set(x, y, Cell::Floor);
            }
        }
    }

    fn door(&mut self, x: usize, y: usize, locked: bool) -> u8 {
        let id = self.doors.len() as u8;
        let raw = self.raw(x, y);
        self.cells[raw] = Cell::Door(id);
        self.doors.push(DoorInfo { raw, locked });
        id
    }

    fn floors_in(&self, x0: usize, x1: usize, y0: usize, y1: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for y in y0..=y1 {
            for x in x0..=x1 {
                if self.cells[self.raw(x, y)] == Cell::Floor {
                    out.push(self.raw(x, y));
                }
            }
        }
        out
    }
}

fn pick<T: Copy>(slice: &[T], rng: &mut Rng) -> T {
    slice[rng.gen_range(0..slice.len())]
}

fn bad(msg: String) -> EnvError {
    EnvError::BadGridConfig(msg)
}

impl Layout {
    fn build(config: &GridConfig, rng: &mut Rng) -> Result<Layout, EnvError> {
        if config.max_steps == 0 {
            return Err(bad("max_steps must be positive".into()));
        }
        let (w, h) = (config.width, config.height);
        let (builder, key_home_raw, box_raw, obstacle_raw, ball_raw, spawn_raws) =
            match config.kind {
                GridKind::DoorKey => Self::build_door_key(w, h, rng)?,
                GridKind::MultiRoom => Self::build_multi_room(w, h, rng)?,
                GridKind::KeyCorridor => Self::build_key_corridor(w, h, rng)?,
                GridKind::ObstructedMaze => Self::build_obstructed_maze(w, h, rng)?,
            };

        let mut free_cells = Vec::new();
        let mut free_index = vec![None; w * h];
        for (raw, cell) in builder.cells.iter().enumerate() {
            if *cell != Cell::Wall {
                free_index[raw] = Some(free_cells.len());
                free_cells.push(raw);
            }
        }
        let to_free = |raw: usize| free_index[raw].expect("object placed on a walkable cell");
        Ok(Layout {
            kind: config.kind,
            width: w,
            height: h,
            cells: builder.cells,
            doors: builder.doors,
            key_home: key_home_raw.map(|home| match home {
                RawKeyHome::Floor(raw) => KeyHome::Floor(to_free(raw)),
                RawKeyHome::InBox => KeyHome::InBox,
            }),
            box_cell: box_raw.map(to_free),
            obstacle_home: obstacle_raw.map(to_free),
            target_ball: ball_raw.map(to_free),
            spawns: spawn_raws.iter().map(|&raw| to_free(raw)).collect(),
            free_cells,
            free_index,
        })
    }

    // Draw order: split column, door row, key cell.
    fn build_door_key(w: usize, h: usize, rng: &mut Rng) -> Result<BuiltParts, EnvError> {
        if w < 5 || h < 5 {
            return Err(bad(format!("door-key needs at least 5x5, got {w}x{h}")));
        }
        let mut b = LayoutBuilder::walls(w, h);
        b.carve(1, w - 2, 1, h - 2);
        let sx = rng.gen_range(2..=w - 3);
        for y in 1..=h - 2 {
            b.set(sx, y, Cell::Wall);
        }
        let dy = rng.gen_range(1..=h - 2);
        b.door(sx, dy, true);
        b.set(w - 2, h - 2, Cell::Goal);
        let left = b.floors_in(1, sx - 1, 1, h - 2);
        let key = pick(&left, rng);
        let spawns: Vec<usize> = left.iter().copied().filter(|&c| c != key).collect();
        Ok((b, Some(RawKeyHome::Floor(key)), None, None, None, spawns))
    }

    // Draw order: door rows left to right, goal cell.
    fn build_multi_room(w: usize, h: usize, rng: &mut Rng) -> Result<BuiltParts, EnvError> {
        if h < 4 || w < 7 || (w - 1) % 3 != 0 {
            return Err(bad(format!(
                "multi-room needs width 3R+1 with R >= 2 and height >= 4, got {w}x{h}"
            )));
        }
        let rooms = (w - 1) / 3;
        let mut b = LayoutBuilder::walls(w, h);
        for j in 0..rooms {
            b.carve(3 * j + 1, 3 * j + 2, 1, h - 2);
        }
        for j in 1..rooms {
            let dy = rng.gen_range(1..=h - 2);
            b.door(3 * j, dy, false);
        }
        let last = b.floors_in(3 * (rooms - 1) + 1, 3 * (rooms - 1) + 2, 1, h - 2);
        let goal = pick(&last, rng);
        b.cells[goal] = Cell::Goal;
        let spawns = b.floors_in(1, 2, 1, h - 2);
        Ok((b, None, None, None, None, spawns))
    }

    // Draw order: locked door row, top-right gap row, bottom-right gap
    // row, target ball cell, key side, key cell.
    fn build_key_corridor(w: usize, h: usize, rng: &mut Rng) -> Result<BuiltParts, EnvError> {
        if w < 9 || (w - 5) % 2 != 0 || h != w - 2 {
            return Err(bad(format!(
                "key-corridor needs width 2s+5 with s >= 2 and height = width - 2, got {w}x{h}"
            )));
        }
        let s = (w - 5) / 2;
        let mut b = LayoutBuilder::walls(w, h);
        // Locked room (top-left), central corridor, two right-hand rooms;
        // the bottom-left block stays solid wall.  The side rooms connect
        // to the corridor through open gaps; only the target room is
        // behind a door.
        b.carve(1, s, 1, s);
        b.carve(s + 2, s + 2, 1, 2 * s + 1);
        b.carve(s + 4, 2 * s + 3, 1, s);
        b.carve(s + 4, 2 * s + 3, s + 2, 2 * s + 1);
        b.door(s + 1, rng.gen_range(1..=s), true);
        let gap_top = rng.gen_range(1..=s);
        b.carve(s + 3, s + 3, gap_top, gap_top);
        let gap_bottom = rng.gen_range(s + 2..=2 * s + 1);
        b.carve(s + 3, s + 3, gap_bottom, gap_bottom);
        let ball = pick(&b.floors_in(1, s, 1, s), rng);
        let key_room = if rng.gen_range(0..2) == 0 {
            b.floors_in(s + 4, 2 * s + 3, 1, s)
        } else {
            b.floors_in(s + 4, 2 * s + 3, s + 2, 2 * s + 1)
        };
        let key = pick(&key_room, rng);
        let spawns = b.floors_in(s + 2, s + 2, 1, 2 * s + 1);
        Ok((
            b,
            Some(RawKeyHome::Floor(key)),
            None,
            None,
            Some(ball),
            spawns,
        ))
    }

    // Draw order: door row, box cell, target ball cell.
    fn build_obstructed_maze(w: usize, h: usize, rng: &mut Rng) -> Result<BuiltParts, EnvError> {
        if w < 7 || (w - 3) % 2 != 0 || h < 4 {
            return Err(bad(format!(
                "obstructed-maze needs width 2s+3 with s >= 2 and height >= 4, got {w}x{h}"
            )));
        }
        let s = (w - 3) / 2;
        let mut b = LayoutBuilder::walls(w, h);
        b.carve(1, s, 1, h - 2);
        b.carve(s + 2, 2 * s + 1, 1, h - 2);
        let dy = rng.gen_range(1..=h - 2);
        b.door(s + 1, dy, true);
        let obstacle = b.raw(s, dy);
        let left_open: Vec<usize> = b
            .floors_in(1, s, 1, h - 2)
            .into_iter()
            .filter(|&c| c != obstacle)
            .collect();
        let key_box = pick(&left_open, rng);
        let ball = pick(&b.floors_in(s + 2, 2 * s + 1, 1, h - 2), rng);
        let spawns: Vec<usize> = left_open.iter().copied().filter(|&c| c != key_box).collect();
        Ok((
            b,
            Some(RawKeyHome::InBox),
            Some(key_box),
            Some(obstacle),
            Some(ball),
            spawns,
        ))
    }

    fn coords(&self, raw: usize) -> (usize, usize) {
        (raw % self.width, raw / self.width)
    }

    fn free_count(&self) -> usize {
        self.free_cells.len()
    }

    /// Radix of the key factor: nothing, or carried/placed, plus an
    /// in-box slot when the kind hides the key in a box.
    fn key_radix(&self) -> usize {
        match self.key_home {
            None => 1,
            Some(KeyHome::Floor(_)) => self.free_count() + 1,
            Some(KeyHome::InBox) => self.free_count() + 2,
        }
    }

    fn obstacle_radix(&self) -> usize {
        match self.obstacle_home {
            None => 1,
            Some(_) => self.free_count() + 1,
        }
    }

    fn state_count(&self) -> usize {
        self.free_count() * 4 * self.key_radix() * self.obstacle_radix() * (1 << self.doors.len())
    }
}

enum RawKeyHome {
    Floor(usize),
    InBox,
}

type BuiltParts = (
    LayoutBuilder,
    Option<RawKeyHome>,
    Option<usize>,
    Option<usize>,
    Option<usize>,
    Vec<usize>,
);

// Facing deltas: east, south, west, north.
const DX: [isize; 4] = [1, 0, -1, 0];
const DY: [isize; 4] = [0, 1, 0, -1];

impl GridWorld {
    pub fn new(config: GridConfig, layout_rng: &mut Rng) -> Result<GridWorld, EnvError> {
        let layout = Arc::new(Layout::build(&config, layout_rng)?);
        let doors = layout.doors.len();
        Ok(GridWorld {
            config,
            layout,
            agent_free: 0,
            dir: 0,
            key: None,
            obstacle: None,
            door_open: vec![false; doors],
            steps: 0,
            started: false,
            finished: false,
        })
    }

    pub fn config(&self) -> &GridConfig {
        &self.config
    }

    pub fn kind(&self) -> GridKind {
        self.layout.kind
    }

    fn key_code(&self) -> usize {
        match (self.layout.key_home, self.key) {
            (None, _) => 0,
            (Some(KeyHome::Floor(_)), Some(KeyState::Carried)) => 0,
            (Some(KeyHome::Floor(_)), Some(KeyState::At(i))) => 1 + i,
            (Some(KeyHome::InBox), Some(KeyState::InBox)) => 0,
            (Some(KeyHome::InBox), Some(KeyState::Carried)) => 1,
            (Some(KeyHome::InBox), Some(KeyState::At(i))) => 2 + i,
            _ => unreachable!("key state tracks key home"),
        }
    }

    fn obstacle_code(&self) -> usize {
        match self.obstacle {
            None => 0,
            Some(ObstacleState::Carried) => 0,
            Some(ObstacleState::At(i)) => 1 + i,
        }
    }

    fn encode(&self) -> usize {
        let f = self.layout.free_count();
        let mut code = 0usize;
        for (d, open) in self.door_open.iter().enumerate() {
            code |= (*open as usize) << d;
        }
        code = code * self.layout.obstacle_radix() + self.obstacle_code();
        code = code * self.layout.key_radix() + self.key_code();
        code = code * 4 + self.dir;
        code * f + self.agent_free
    }

    fn decode_parts(
        &self,
        index: usize,
    ) -> Result<(usize, usize, Option<KeyState>, Option<ObstacleState>, Vec<bool>), EnvError> {
        let states = self.layout.state_count();
        if index >= states {
            return Err(EnvError::StateOutOfRange { index, states });
        }
        let f = self.layout.free_count();
        let mut x = index;
        let agent = x % f;
        x /= f;
        let dir = x % 4;
        x /= 4;
        let key = match self.layout.key_home {
            None => None,
            Some(KeyHome::Floor(_)) => {
                let c = x % self.layout.key_radix();
                x /= self.layout.key_radix();
                Some(if c == 0 {
                    KeyState::Carried
                } else {
                    KeyState::At(c - 1)
                })
            }
            Some(KeyHome::InBox) => {
                let c = x % self.layout.key_radix();
                x /= self.layout.key_radix();
                Some(match c {
                    0 => KeyState::InBox,
                    1 => KeyState::Carried,
                    _ => KeyState::At(c - 2),
                })
            }
        };
        let obstacle = match self.layout.obstacle_home {
            None => None,
            Some(_) => {
                let c = x % self.layout.obstacle_radix();
                x /= self.layout.obstacle_radix();
                Some(if c == 0 {
                    ObstacleState::Carried
                } else {
                    ObstacleState::At(c - 1)
                })
            }
        };
        let doors = (0..self.layout.doors.len()).map(|d| (x >> d) & 1 == 1).collect();
        Ok((agent, dir, key, obstacle, doors))
    }

    /// Decodes a table index back into a readable state description.
    pub fn decode_state(&self, index: usize) -> Result<GridStateView, EnvError> {
        let (agent, dir, key, obstacle, doors_open) = self.decode_parts(index)?;
        let place = |state: KeyState| match state {
            KeyState::InBox => ObjectPlace::InBox,
            KeyState::Carried => ObjectPlace::Carried,
            KeyState::At(i) => {
                let (x, y) = self.layout.coords(self.layout.free_cells[i]);
                ObjectPlace::At(x, y)
            }
        };
        Ok(GridStateView {
            agent: self.layout.coords(self.layout.free_cells[agent]),
            dir,
            key: key.map(place),
            obstacle: obstacle.map(|o| match o {
                ObstacleState::Carried => ObjectPlace::Carried,
                ObstacleState::At(i) => {
                    let (x, y) = self.layout.coords(self.layout.free_cells[i]);
                    ObjectPlace::At(x, y)
                }
            }),
            doors_open,
        })
    }

    fn carrying(&self) -> bool {
        matches!(self.key, Some(KeyState::Carried))
            || matches!(self.obstacle, Some(ObstacleState::Carried))
    }

    fn object_at(&self, raw: usize) -> bool {
        let Some(free) = self.layout.free_index[raw] else {
            return false;
        };
        if matches!(self.key, Some(KeyState::At(i)) if i == free) {
            return true;
        }
        if matches!(self.key, Some(KeyState::InBox)) && self.layout.box_cell == Some(free) {
            return true;
        }
        if matches!(self.obstacle, Some(ObstacleState::At(i)) if i == free) {
            return true;
        }
        self.layout.target_ball == Some(free)
    }

    fn passable(&self, raw: usize) -> bool {
        match self.layout.cells[raw] {
            Cell::Wall => false,
            Cell::Door(d) => self.door_open[d as usize] && !self.object_at(raw),
            Cell::Floor | Cell::Goal => !self.object_at(raw),
        }
    }

    /// Raw index of the cell the agent faces. Border walls keep every
    /// walkable cell's neighbours in bounds.
    fn front_raw(&self) -> usize {
        let (x, y) = self.layout.coords(self.layout.free_cells[self.agent_free]);
        let fx = (x as isize + DX[self.dir]) as usize;
        let fy = (y as isize + DY[self.dir]) as usize;
        fy * self.layout.width + fx
    }

    /// Text art of the current state (or the bare layout before the first
    /// reset). Walls `#`, floor `.`, goal `G`, doors `L` (locked closed),
    /// `d` (closed), `/` (open), key `k`, target ball `b`, obstacle `o`,
    /// box `B`, agent `>v<^`.
    pub fn render(&self) -> String {
        let mut chars: Vec<char> = self
            .layout
            .cells
            .iter()
            .map(|cell| match cell {
                Cell::Wall => '#',
                Cell::Floor => '.',
                Cell::Goal => 'G',
                Cell::Door(_) => 'd',
            })
            .collect();
        for (d, info) in self.layout.doors.iter().enumerate() {
            chars[info.raw] = if self.started && self.door_open[d] {
                '/'
            } else if info.locked {
                'L'
            } else {
                'd'
            };
        }
        let effective_key = if self.started {
            self.key
        } else {
            self.layout.key_home.map(|home| match home {
                KeyHome::Floor(i) => KeyState::At(i),
                KeyHome::InBox => KeyState::InBox,
            })
        };
        if let Some(KeyState::At(i)) = effective_key {
            chars[self.layout.free_cells[i]] = 'k';
        }
        if matches!(effective_key, Some(KeyState::InBox)) {
            if let Some(b) = self.layout.box_cell {
                chars[self.layout.free_cells[b]] = 'B';
            }
        }
        let effective_obstacle = if self.started {
            self.obstacle
        } else {
            self.layout.obstacle_home.map(ObstacleState::At)
        };
        if let Some(ObstacleState::At(i)) = effective_obstacle {
            chars[self.layout.free_cells[i]] = 'o';
        }
        if let Some(i) = self.layout.target_ball {
            chars[self.layout.free_cells[i]] = 'b';
        }
        if self.started {
            chars[self.layout.free_cells[self.agent_free]] = ['>', 'v', '<', '^'][self.dir];
        }
        let mut out = String::new();
        for y in 0..self.layout.height {
            for x in 0..self.layout.width {
                out.push(chars[y * self.layout.width + x]);
            }
            out.push('\n');
        }
        out
    }
}

impl Environment for GridWorld {
    fn state_count(&self) -> usize {
        self.layout.state_count()
    }

    fn action_count(&self) -> usize {
        GRID_ACTION_COUNT
    }

    // Draw order: spawn cell, facing.
    fn reset(&mut self, rng: &mut Rng) -> usize {
        self.agent_free = self.layout.spawns[rng.gen_range(0..self.layout.spawns.len())];
        self.dir = rng.gen_range(0..4);
        self.key = self.layout.key_home.map(|home| match home {
            KeyHome::Floor(i) => KeyState::At(i),
            KeyHome::InBox => KeyState::InBox,
        });
        self.obstacle = self.layout.obstacle_home.map(ObstacleState::At);
        for open in &mut self.door_open {
            *open = false;
        }
        self.steps = 0;
        self.started = true;
        self.finished = false;
        self.encode()
    }

    fn finished(&self) -> bool {
        self.finished
    }

    fn step(&mut self, action: usize) -> Result<EnvStep, EnvError> {
        let Some(action) = GridAction::from_index(action) else {
            return Err(EnvError::ActionOutOfRange {
                action,
                actions: GRID_ACTION_COUNT,
            });
        };
        if !self.started {
            return Err(EnvError::NotReset);
        }
        if self.finished {
            return Err(EnvError::EpisodeFinished);
        }
        self.steps += 1;
        let mut success = false;
        match action {
            GridAction::TurnLeft => self.dir = (self.dir + 3) % 4,
            GridAction::TurnRight => self.dir = (self.dir + 1) % 4,
            GridAction::Forward => {
                let front = self.front_raw();
                if self.passable(front) {
                    self.agent_free = self.layout.free_index[front]
                        .expect("passable cells are walkable");
                    success = self.layout.cells[front] == Cell::Goal;
                }
            }
            GridAction::Pickup => {
                let front = self.front_raw();
                if !self.carrying() {
                    if let Some(free) = self.layout.free_index[front] {
                        if matches!(self.key, Some(KeyState::At(i)) if i == free) {
                            self.key = Some(KeyState::Carried);
                        } else if matches!(self.obstacle, Some(ObstacleState::At(i)) if i == free) {
                            self.obstacle = Some(ObstacleState::Carried);
                        } else if self.layout.target_ball == Some(free) {
                            success = true;
                        }
                    }
                }
            }
            GridAction::Drop => {
                let front = self.front_raw();
                if self.layout.cells[front] == Cell::Floor && !self.object_at(front) {
                    let free = self.layout.free_index[front].expect("floor cells are walkable");
                    if matches!(self.key, Some(KeyState::Carried)) {
                        self.key = Some(KeyState::At(free));
                    } else if matches!(self.obstacle, Some(ObstacleState::Carried)) {
                        self.obstacle = Some(ObstacleState::At(free));
                    }
                }
            }
            GridAction::Toggle => {
                let front = self.front_raw();
                match self.layout.cells[front] {
                    Cell::Door(d) => {
                        let d = d as usize;
                        // Doors open monotonically: toggling an open door
                        // leaves it open, and a locked one needs the key
                        // in hand.
                        if !self.door_open[d]
                            && (!self.layout.doors[d].locked
                                || matches!(self.key, Some(KeyState::Carried)))
                        {
                            self.door_open[d] = true;
                        }
                    }
                    _ => {
                        if matches!(self.key, Some(KeyState::InBox))
                            && self.layout.free_index[front] == self.layout.box_cell
                        {
                            let slot = self.layout.box_cell.expect("in-box key has a box");
                            self.key = Some(KeyState::At(slot));
                        }
                    }
                }
            }
            GridAction::Done => {}
        }
        let (reward, done) = if success {
            (success_reward(self.steps, self.config.max_steps), true)
        } else {
            (0.0, false)
        };
        let truncated = !done && self.steps >= self.config.max_steps;
        self.finished = done || truncated;
        Ok(EnvStep {
            observation: self.encode(),
            reward,
            done,
            truncated,
        })
    }

    fn describe(&self) -> String {
        format!(
            "{}: {}x{}, {} states, {} actions, cap {} steps\n{}",
            self.layout.kind.name(),
            self.layout.width,
            self.layout.height,
            self.layout.state_count(),
            GRID_ACTION_COUNT,
            self.config.max_steps,
            self.render(),
        )
    }
}

#[cfg(test)]
mod tests {
    use std::collections::{HashMap, VecDeque};

    use super::*;
    use crate::seeding::seeded_rng;

    fn build(kind: GridKind, seed: u64) -> GridWorld {
        let mut rng = seeded_rng(seed, "layout");
        GridWorld::new(GridConfig::default_for(kind), &mut rng).unwrap()
    }

    /// Breadth-first search over the reachable state graph from one reset,
    /// skipping forbidden actions. Returns the shortest successful action
    /// sequence if one exists.
    fn bfs_solve(env: &GridWorld, seed: u64, forbid: &[GridAction]) -> Option<Vec<GridAction>> {
        let mut start = env.clone();
        let mut rng = seeded_rng(seed, "dynamics");
        let s0 = start.reset(&mut rng);
        let mut parents: HashMap<usize, (usize, GridAction)> = HashMap::new();
        let mut snapshots: HashMap<usize, GridWorld> = HashMap::new();
        snapshots.insert(s0, start);
        let mut queue = VecDeque::from([s0]);
        while let Some(code) = queue.pop_front() {
            let snapshot = snapshots.get(&code).unwrap().clone();
            for action in GridAction::ALL {
                if forbid.contains(&action) {
                    continue;
                }
                let mut next = snapshot.clone();
                let step = next.step(action.index()).unwrap();
                if step.done {
                    let mut path = vec![action];
                    let mut at = code;
                    while at != s0 {
                        let (prev, a) = parents[&at];
                        path.push(a);
                        at = prev;
                    }
                    path.reverse();
                    return Some(path);
                }
                if !snapshots.contains_key(&step.observation) {
                    parents.insert(step.observation, (code, action));
                    snapshots.insert(step.observation, next);
                    queue.push_back(step.observation);
                }
            }
        }
        None
    }

    fn replay(env: &GridWorld, seed: u64, path: &[GridAction]) -> (GridWorld, EnvStep) {
        let mut run = env.clone();
        let mut rng = seeded_rng(seed, "dynamics");
        run.reset(&mut rng);
        let mut last = None;
        for action in path {
            last = Some(run.step(action.index()).unwrap());
        }
        (run, last.unwrap())
    }

    #[test]
    fn default_state_counts_match_the_layout_arithmetic() {
        // door-key 6x6: 13 walkable cells, key carried-or-placed, 1 door.
        assert_eq!(build(GridKind::DoorKey, 1).state_count(), 13 * 4 * 14 * 2);
        // multi-room 10x4: three 2x2 rooms plus 2 doors walkable, no objects.
        assert_eq!(build(GridKind::MultiRoom, 1).state_count(), 14 * 4 * 4);
        // key-corridor 9x7: 20 walkable cells, key, 1 locked door.
        assert_eq!(build(GridKind::KeyCorridor, 1).state_count(), 20 * 4 * 21 * 2);
        // obstructed-maze 7x5: 13 walkable cells, key with in-box slot,
        // obstacle, 1 door.
        assert_eq!(
            build(GridKind::ObstructedMaze, 1).state_count(),
            13 * 4 * 15 * 14 * 2
        );
    }

    #[test]
    fn action_indices_are_stable() {
        let names: Vec<&str> = GridAction::ALL.iter().map(|a| a.name()).collect();
        assert_eq!(
            names,
            ["turn-left", "turn-right", "forward", "pickup", "drop", "toggle", "done"]
        );
        for (i, action) in GridAction::ALL.iter().enumerate() {
            assert_eq!(action.index(), i);
            assert_eq!(GridAction::from_index(i), Some(*action));
        }
        assert_eq!(GridAction::from_index(7), None);
    }

    #[test]
    fn success_reward_spans_one_down_to_a_tenth() {
        assert_eq!(success_reward(0, 100), 1.0);
        assert!((success_reward(100, 100) - 0.1).abs() < 1e-12);
        assert!((success_reward(50, 100) - 0.55).abs() < 1e-12);
    }

    #[test]
    fn encode_decode_round_trips_on_random_indices() {
        for kind in GridKind::ALL {
            let env = build(kind, 7);
            let states = env.state_count();
            let mut rng = seeded_rng(3, "probe");
            for _ in 0..200 {
                let index = rand::Rng::gen_range(&mut rng, 0..states);
                let (agent, dir, key, obstacle, doors) = env.decode_parts(index).unwrap();
                let mut probe = env.clone();
                probe.agent_free = agent;
                probe.dir = dir;
                probe.key = key;
                probe.obstacle = obstacle;
                probe.door_open = doors;
                assert_eq!(probe.encode(), index, "{kind:?}");
            }
            assert_eq!(
                env.decode_parts(states),
                Err(EnvError::StateOutOfRange { index: states, states })
            );
        }
    }

    #[test]
    fn five_by_five_door_key_whole_index_space_round_trips() {
        // Exhaustive on the smallest structurally valid door-key grid: the
        // decode of every index re-encodes to itself, so two distinct
        // states can never share an index.
        let mut rng = seeded_rng(11, "layout");
        let env =
            GridWorld::new(GridConfig::sized(GridKind::DoorKey, 5, 5), &mut rng).unwrap();
        assert_eq!(env.state_count(), 7 * 4 * 8 * 2);
        for index in 0..env.state_count() {
            let (agent, dir, key, obstacle, doors) = env.decode_parts(index).unwrap();
            let mut probe = env.clone();
            probe.agent_free = agent;
            probe.dir = dir;
            probe.key = key;
            probe.obstacle = obstacle;
            probe.door_open = doors;
            assert_eq!(probe.encode(), index);
        }
    }

    #[test]
    fn reachable_states_decode_consistently() {
        // Walk the whole reachable component of a small door-key grid and
        // check that a revisited index always describes the identical
        // state — a collision between two distinct states would trip the
        // view comparison. (The reachable set can be modest: with one
        // floor column per side, the goal square may gate the far column.)
        for seed in [11u64, 12, 13] {
            let mut rng = seeded_rng(seed, "layout");
            let env =
                GridWorld::new(GridConfig::sized(GridKind::DoorKey, 5, 5), &mut rng).unwrap();
            let mut start = env.clone();
            let mut dyn_rng = seeded_rng(seed + 100, "dynamics");
            let s0 = start.reset(&mut dyn_rng);
            let mut views: HashMap<usize, GridStateView> = HashMap::new();
            views.insert(s0, start.decode_state(s0).unwrap());
            let mut snapshots = HashMap::from([(s0, start)]);
            let mut queue = VecDeque::from([s0]);
            let mut explored = 0usize;
            while let Some(code) = queue.pop_front() {
                explored += 1;
                let snapshot = snapshots.get(&code).unwrap().clone();
                for action in GridAction::ALL {
                    let mut next = snapshot.clone();
                    let step = next.step(action.index()).unwrap();
                    if step.done {
                        continue;
                    }
                    assert!(step.observation < env.state_count());
                    let view = next.decode_state(step.observation).unwrap();
                    match views.get(&step.observation) {
                        Some(seen) => assert_eq!(seen, &view),
                        None => {
                            views.insert(step.observation, view);
                            snapshots.insert(step.observation, next);
                            queue.push_back(step.observation);
                        }
                    }
                }
            }
            assert!(explored >= 60, "seed {seed}: explored only {explored} states");
        }
    }

    #[test]
    fn every_kind_is_solvable_and_pays_the_formula_reward() {
        for kind in GridKind::ALL {
            for seed in 0..3u64 {
                let env = build(kind, 40 + seed);
                let path = bfs_solve(&env, 90 + seed, &[])
                    .unwrap_or_else(|| panic!("{kind:?} seed {seed} unsolvable"));
                assert!((path.len() as u32) <= env.config().max_steps);
                let (solved, last) = replay(&env, 90 + seed, &path);
                assert!(last.done && !last.truncated, "{kind:?}");
                let expect = success_reward(path.len() as u32, env.config().max_steps);
                assert_eq!(last.reward, expect, "{kind:?}");
                assert!(last.reward > 0.1 && last.reward <= 1.0);
                assert!(solved.finished());
            }
        }
    }

    #[test]
    fn locked_kinds_are_unsolvable_without_pickup() {
        for kind in [GridKind::DoorKey, GridKind::KeyCorridor, GridKind::ObstructedMaze] {
            assert!(
                bfs_solve(&build(kind, 40), 90, &[GridAction::Pickup]).is_none(),
                "{kind:?} should need the pickup action"
            );
        }
        // The unlocked kind stays solvable without ever picking up.
        assert!(bfs_solve(&build(GridKind::MultiRoom, 40), 90, &[GridAction::Pickup]).is_some());
    }

    #[test]
    fn obstructed_maze_needs_the_drop_action() {
        // The key can only be taken with empty hands, so the obstacle must
        // be put down somewhere first.
        assert!(bfs_solve(&build(GridKind::ObstructedMaze, 40), 90, &[GridAction::Drop]).is_none());
        // Door-key never needs to drop anything.
        assert!(bfs_solve(&build(GridKind::DoorKey, 40), 90, &[GridAction::Drop]).is_some());
    }

    #[test]
    fn solution_passes_through_carry_and_open_states() {
        let env = build(GridKind::DoorKey, 41);
        let path = bfs_solve(&env, 91, &[]).unwrap();
        let mut run = env.clone();
        let mut rng = seeded_rng(91, "dynamics");
        run.reset(&mut rng);
        let mut carried = false;
        let mut opened = false;
        for action in &path {
            let code = run.step(action.index()).unwrap().observation;
            let view = run.decode_state(code).unwrap();
            carried |= view.key == Some(ObjectPlace::Carried);
            opened |= view.doors_open.iter().any(|&o| o);
        }
        assert!(carried, "solution never carried the key");
        assert!(opened, "solution never opened the door");
    }

    #[test]
    fn turning_four_times_returns_to_the_same_state() {
        let mut env = build(GridKind::DoorKey, 5);
        let mut rng = seeded_rng(6, "dynamics");
        let s0 = env.reset(&mut rng);
        let mut code = s0;
        for _ in 0..4 {
            code = env.step(GridAction::TurnLeft.index()).unwrap().observation;
        }
        assert_eq!(code, s0);
        env.step(GridAction::TurnRight.index()).unwrap();
        code = env.step(GridAction::TurnLeft.index()).unwrap().observation;
        assert_eq!(code, s0);
    }

    #[test]
    fn walking_into_a_wall_stays_put() {
        let mut env = build(GridKind::DoorKey, 5);
        let mut rng = seeded_rng(6, "dynamics");
        let mut code = env.reset(&mut rng);
        // Parse the rendering to find a facing that meets a wall.
        loop {
            let art: Vec<Vec<char>> = env.render().lines().map(|l| l.chars().collect()).collect();
            let view = env.decode_state(code).unwrap();
            let (x, y) = view.agent;
            let fx = (x as isize + DX[view.dir]) as usize;
            let fy = (y as isize + DY[view.dir]) as usize;
            if art[fy][fx] == '#' {
                let after = env.step(GridAction::Forward.index()).unwrap().observation;
                assert_eq!(after, code);
                break;
            }
            code = env.step(GridAction::TurnLeft.index()).unwrap().observation;
        }
    }

    #[test]
    fn done_action_changes_nothing_and_truncation_hits_the_cap() {
        let mut env = build(GridKind::DoorKey, 5);
        let mut rng = seeded_rng(6, "dynamics");
        let s0 = env.reset(&mut rng);
        let cap = env.config().max_steps;
        for t in 1..=cap {
            let step = env.step(GridAction::Done.index()).unwrap();
            assert_eq!(step.observation, s0);
            assert_eq!(step.reward, 0.0);
            assert!(!step.done);
            assert_eq!(step.truncated, t == cap);
        }
        assert_eq!(
            env.step(GridAction::Done.index()),
            Err(EnvError::EpisodeFinished)
        );
    }

    #[test]
    fn reset_restores_doors_keys_and_obstacles() {
        for kind in [GridKind::DoorKey, GridKind::KeyCorridor, GridKind::ObstructedMaze] {
            let env = build(kind, 42);
            let path = bfs_solve(&env, 92, &[]).unwrap();
            // Replay all but the final (winning) step, leaving the episode
            // mid-flight with moved objects, then reset.
            let (mut run, _) = replay(&env, 92, &path[..path.len() - 1].to_vec());
            let mut rng = seeded_rng(93, "dynamics");
            let code = run.reset(&mut rng);
            let view = run.decode_state(code).unwrap();
            let mut fresh = env.clone();
            let mut fresh_rng = seeded_rng(93, "dynamics");
            let fresh_code = fresh.reset(&mut fresh_rng);
            let fresh_view = fresh.decode_state(fresh_code).unwrap();
            assert_eq!(view.key, fresh_view.key, "{kind:?}");
            assert_eq!(view.obstacle, fresh_view.obstacle, "{kind:?}");
            assert!(view.doors_open.iter().all(|&o| !o), "{kind:?}");
        }
    }

    #[test]
    fn open_doors_stay_open_under_toggle() {
        let env = build(GridKind::DoorKey, 41);
        let path = bfs_solve(&env, 91, &[]).unwrap();
        // Find the prefix after which the door first reads open; the agent
        // still faces the door cell right after toggling it.
        let mut run = env.clone();
        let mut rng = seeded_rng(91, "dynamics");
        run.reset(&mut rng);
        for action in &path {
            let code = run.step(action.index()).unwrap().observation;
            let view = run.decode_state(code).unwrap();
            if view.doors_open[0] {
                let again = run.step(GridAction::Toggle.index()).unwrap().observation;
                let after = run.decode_state(again).unwrap();
                assert!(after.doors_open[0], "toggle closed an open door");
                return;
            }
        }
        panic!("path never opened the door");
    }

    #[test]
    fn layouts_are_reproducible_and_seed_sensitive() {
        for kind in GridKind::ALL {
            assert_eq!(build(kind, 9).render(), build(kind, 9).render());
            let base = build(kind, 0).render();
            assert!(
                (1..6).any(|s| build(kind, s).render() != base),
                "{kind:?} layouts never vary"
            );
        }
    }

    #[test]
    fn resets_randomize_the_spawn() {
        let mut env = build(GridKind::KeyCorridor, 3);
        let mut rng = seeded_rng(4, "dynamics");
        let first = env.reset(&mut rng);
        assert!((0..20).any(|_| env.reset(&mut rng) != first));
    }

    #[test]
    fn stepping_before_reset_is_rejected() {
        let mut env = build(GridKind::DoorKey, 5);
        assert_eq!(env.step(0), Err(EnvError::NotReset));
        assert_eq!(
            env.step(9),
            Err(EnvError::ActionOutOfRange { action: 9, actions: 7 })
        );
    }

    #[test]
    fn invalid_dimensions_are_rejected() {
        let mut rng = seeded_rng(0, "layout");
        for (kind, w, h) in [
            (GridKind::DoorKey, 4, 6),
            (GridKind::DoorKey, 6, 4),
            (GridKind::MultiRoom, 9, 4),
            (GridKind::MultiRoom, 7, 3),
            (GridKind::KeyCorridor, 9, 8),
            (GridKind::KeyCorridor, 8, 6),
            (GridKind::ObstructedMaze, 6, 5),
            (GridKind::ObstructedMaze, 7, 3),
        ] {
            let config = GridConfig { kind, width: w, height: h, max_steps: 100 };
            assert!(
                matches!(GridWorld::new(config, &mut rng), Err(EnvError::BadGridConfig(_))),
                "{kind:?} {w}x{h} should be rejected"
            );
        }
        let zero_cap = GridConfig { max_steps: 0, ..GridConfig::default_for(GridKind::DoorKey) };
        assert!(matches!(
            GridWorld::new(zero_cap, &mut rng),
            Err(EnvError::BadGridConfig(_))
        ));
    }

    #[test]
    fn kind_names_parse_back() {
        for kind in GridKind::ALL {
            assert_eq!(GridKind::parse(kind.name()), Some(kind));
        }
        assert_eq!(GridKind::parse("labyrinth"), None);
    }

    #[test]
    fn render_marks_all_layout_features() {
        let env = build(GridKind::ObstructedMaze, 2);
        let art = env.render();
        assert!(art.contains('L'), "locked door missing");
        assert!(art.contains('B'), "key box missing");
        assert!(art.contains('o'), "obstacle missing");
        assert!(art.contains('b'), "target ball missing");
        let goal = build(GridKind::DoorKey, 2).render();
        assert!(goal.contains('G'), "goal missing");
        assert!(goal.contains('k'), "key missing");
    }
}
