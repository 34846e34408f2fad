//! Plain-text triplet dump of a problem, upper triangle only.
//!
//! ```text
//! sense maximize
//! block <b> <dim>
//! objective_constant <v>
//! obj <b> <r> <c> <re> <im>
//! eq <k> <rhs>
//! coef <k> <b> <r> <c> <re> <im>
//! offset <k> <dim>
//! offset_const <k> <r> <c> <re> <im>
//! offset_term <k> <b> <coef>
//! ```

use std::io::{self, Write};

use super::{SdpProblem, Sense};

pub fn write_triplets<W: Write>(p: &SdpProblem, mut w: W) -> io::Result<()> {
    let sense = match p.sense() {
        Sense::Maximize => "maximize",
        Sense::Minimize => "minimize",
    };
    writeln!(w, "sense {sense}")?;
    for (b, d) in p.block_dims().iter().enumerate() {
        writeln!(w, "block {b} {d}")?;
    }
    writeln!(w, "objective_constant {:e}", p.objective_constant())?;
    for b in 0..p.num_blocks() {
        for &(r, c, v) in p.objective(b).entries() {
            if r <= c {
                writeln!(w, "obj {b} {r} {c} {:e} {:e}", v.re, v.im)?;
            }
        }
    }
    for (k, eq) in p.equalities().iter().enumerate() {
        writeln!(w, "eq {k} {:e}", eq.rhs)?;
        for (b, a) in &eq.terms {
            for &(r, c, v) in a.entries() {
                if r <= c {
                    writeln!(w, "coef {k} {b} {r} {c} {:e} {:e}", v.re, v.im)?;
                }
            }
        }
    }
    for (k, off) in p.offsets().iter().enumerate() {
        let d = off.constant.nrows();
        writeln!(w, "offset {k} {d}")?;
        for r in 0..d {
            for c in r..d {
                let v = off.constant[(r, c)];
                if v.re != 0.0 || v.im != 0.0 {
                    writeln!(w, "offset_const {k} {r} {c} {:e} {:e}", v.re, v.im)?;
                }
            }
        }
        for &(b, coef) in &off.terms {
            writeln!(w, "offset_term {k} {b} {coef:e}")?;
        }
    }
    Ok(())
}
