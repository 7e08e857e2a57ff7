//! Feasibility models for optical quantum links between a ground station and
//! a low-Earth-orbit satellite.
//!
//! The crate is organised around the physical subsystems of such a link:
//!
//! - [`atmosphere`]: turbulence profile, Fried parameter, beam spreading and
//!   the geometric collection efficiency of the channel
//! - [`radiometry`]: background photon rates (daylight, moonlight, thermal,
//!   night-sky brightness) and photon-counting signal-to-noise ratios
//! - [`polarization`]: Jones-calculus model of the polarization channel of a
//!   tracked pass and the residual error of compensation schemes
//! - [`keyrate`]: BB84 key fractions with and without decoy states, and
//!   coincidence budgets for entanglement distribution topologies
//! - [`sync`]: laser-ranging drift statistics and the clock synchronisation
//!   rate they imply
//! - [`scenario`] / [`figures`]: JSON scenario files and the sweep engine
//!   behind the `qlink` command line tool

pub mod atmosphere;
pub mod constants;
pub mod figures;
pub mod jones;
pub mod keyrate;
pub mod numeric;
pub mod polarization;
pub mod radiometry;
pub mod scenario;
pub mod sync;
