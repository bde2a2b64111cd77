//! Plain-text mesh dump: one prism per line, `id level t0 t1 v0 ... vd`.
//! In two space dimensions each vertex is written as two numbers.

use std::io::Write;

use super::PrismaticMesh;

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

impl PrismaticMesh {
    pub fn write_dump(&self, out: &mut impl Write) -> std::io::Result<()> {
        for p in &self.prisms {
            let mut line = format!("{} {} {} {}", p.id, p.level, num(p.time.a), num(p.time.b));
            for v in p.base.vertices() {
                for c in v.iter().take(self.dim) {
                    line.push(' ');
                    line.push_str(&num(*c));
                }
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use crate::mesh::initial_prism_mesh;

    #[test]
    fn dump_lines() {
        let m = initial_prism_mesh(2, 1.0).unwrap().uniform_refine();
        let mut buf = Vec::new();
        m.write_dump(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 16);
        assert_eq!(lines[0].split(' ').count(), 4 + 6);
        let back: f64 = lines[3].split(' ').nth(3).unwrap().parse().unwrap();
        assert_eq!(back, m.prisms()[3].time.b);
    }
}
