//! Truncated-basis operators and the rotating-frame Hamiltonian.
//!
//! `cargo run --example fock_operators`

use driven_kerr::fock::{annihilation_matrix, creation_matrix, hamiltonian_at, lindblad_operators, number_matrix};
use driven_kerr::{Frame, SystemParams};

fn main() -> driven_kerr::Result<()> {
    let a = annihilation_matrix(4)?;
    let ad = creation_matrix(4)?;
    println!("a (dim 4):\n{:.4}", a.matrix().map(|z| z.re));
    let comm = a.matrix() * ad.matrix() - ad.matrix() * a.matrix();
    println!("[a, a^dagger] diagonal: {:?}", comm.diagonal().iter().map(|z| z.re).collect::<Vec<_>>());
    println!("a^dagger a diagonal: {:?}", number_matrix(4)?.matrix().diagonal().iter().map(|z| z.re).collect::<Vec<_>>());

    let p = SystemParams::strong_kerr();
    for frame in [Frame::Omega1, Frame::Omega2] {
        let h = hamiltonian_at(0.3, &p, 6, frame)?;
        println!(
            "{frame:?}: diag {:?}, <1|H|0> = {:.4}, hermiticity defect {:.1e}",
            h.matrix().diagonal().iter().map(|z| z.re).collect::<Vec<_>>(),
            h.entry(1, 0),
            h.hermiticity_defect()
        );
    }
    let thermal = SystemParams { n_bath: 1.0, ..p };
    println!("Lindblad operators with N = 1: {}", lindblad_operators(&thermal, 4)?.len());
    Ok(())
}
