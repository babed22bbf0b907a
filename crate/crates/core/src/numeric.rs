use num_complex::Complex64;

/// Compensated (Neumaier) summation.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Neumaier {
    sum: Complex64,
    comp: Complex64,
}

impl Neumaier {
    pub(crate) fn add(&mut self, x: Complex64) {
        fn part(sum: &mut f64, comp: &mut f64, x: f64) {
            let t = *sum + x;
            if sum.abs() >= x.abs() {
                *comp += (*sum - t) + x;
            } else {
                *comp += (x - t) + *sum;
            }
            *sum = t;
        }
        part(&mut self.sum.re, &mut self.comp.re, x.re);
        part(&mut self.sum.im, &mut self.comp.im, x.im);
    }

    pub(crate) fn sum(&self) -> Complex64 {
        self.sum + self.comp
    }
}
