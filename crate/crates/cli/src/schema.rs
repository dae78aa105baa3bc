//! Input schema summaries printed with usage errors.

pub const CONFIGURATION: &str = r#"configuration file:
  {
    "dimension": 2,
    "centers": [[0, 0], [2, 0], [1, 1.7320508075688772]],
    "contact_tolerance": 1e-9,            (optional)
    "velocities": [[1, 0], [0, 0], [0, -1]]  (optional, one per ball)
  }"#;

pub const SCHEDULE: &str = r#"schedule file (ball indices are 1-based):
  { "kind": "explicit", "edges": [[1, 2], [2, 3], [1, 2]] }
  { "kind": "round-robin", "edges": [[1, 2], [2, 3]], "max_steps": 1000 }
  { "kind": "lexicographic-greedy", "edges": [[1, 2], [2, 3]] }
  { "kind": "seeded-random", "edges": [[1, 2], [2, 3]], "seed": 7 }"#;

pub const HALFSPACES: &str = r#"half-space family file (indices in "word" are 1-based):
  {
    "normals": [[0, 1], [-0.1, -1]],
    "start": [0, -1],
    "witness": [-1, 0.05],
    "policy": { "kind": "round-robin" },   (or periodic with "word", or seeded-random with "seed")
    "budget": 1000000                      (optional)
  }"#;

pub const LATTICE: &str = r#"lattice file (each pair [a, b] is the point (a, b·√3), a ≡ b mod 2):
  { "points": [[0, 0], [2, 0], [1, 1]] }"#;
