//! Configs bundled into the binary; `run @NAME` runs one.

pub struct Example {
    pub name: &'static str,
    pub description: &'static str,
    pub text: &'static str,
}

macro_rules! example {
    ($name:literal, $desc:literal) => {
        Example {
            name: $name,
            description: $desc,
            text: include_str!(concat!("../configs/", $name, ".json")),
        }
    };
}

pub const ALL: &[Example] = &[
    example!("p2_delta", "P2 with -K: volume, S of a line, delta over declared valuations"),
    example!("blowup_p2_basics", "Bl_p P2: Zariski decomposition, thresholds, expected orders"),
    example!("blowup_p2_probe", "Bl_p P2 with -K: beta, delta and a stability probe (unstable)"),
    example!("p2_ma_solve", "P2 with 3H: norm and Monge-Ampere solution for a two-atom measure"),
    example!("p2_toric_finite_k", "toric P2: jumping numbers at k = 1 and 50, delta over a lattice box"),
    example!("hirzebruch_surface", "F1 spelled out as a surface lattice; beta of the (-1)-section"),
    example!("p1xp1_toric_fan", "P1xP1 spelled out as a fan with ray valuations"),
];

pub fn find(name: &str) -> Option<&'static Example> {
    ALL.iter().find(|e| e.name == name)
}
