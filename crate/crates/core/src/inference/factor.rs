use crate::network::CompiledNetwork;
use crate::scalar::Scalar;

/// Table over an ordered set of network variables, row-major with the last
/// variable varying fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct Factor<S> {
    vars: Vec<usize>,
    cards: Vec<usize>,
    table: Vec<S>,
}

/// Odometer over a mixed-radix index space, last digit fastest.
struct Odometer<'a> {
    cards: &'a [usize],
    digits: Vec<usize>,
}

impl<'a> Odometer<'a> {
    fn new(cards: &'a [usize]) -> Self {
        Odometer {
            cards,
            digits: vec![0; cards.len()],
        }
    }

    fn advance(&mut self) {
        for i in (0..self.digits.len()).rev() {
            self.digits[i] += 1;
            if self.digits[i] < self.cards[i] {
                return;
            }
            self.digits[i] = 0;
        }
    }
}

fn strides(cards: &[usize]) -> Vec<usize> {
    let mut s = vec![1; cards.len()];
    for i in (0..cards.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * cards[i + 1];
    }
    s
}

impl<S: Scalar> Factor<S> {
    pub fn new(vars: Vec<usize>, cards: Vec<usize>, table: Vec<S>) -> Self {
        assert_eq!(vars.len(), cards.len());
        assert_eq!(table.len(), cards.iter().product::<usize>());
        Factor { vars, cards, table }
    }

    pub fn scalar(value: S) -> Self {
        Factor::new(Vec::new(), Vec::new(), vec![value])
    }

    /// Conditional table of node `index` over `(parents..., node)`.
    pub fn from_node(net: &CompiledNetwork<S>, index: usize) -> Self {
        let mut vars = net.parents_of(index).to_vec();
        vars.push(index);
        let cards = vars.iter().map(|&v| net.cardinality(v)).collect();
        Factor::new(vars, cards, net.node(index).cpt.clone())
    }

    pub fn vars(&self) -> &[usize] {
        &self.vars
    }

    pub fn table(&self) -> &[S] {
        &self.table
    }

    pub fn contains(&self, var: usize) -> bool {
        self.vars.contains(&var)
    }

    pub fn map(mut self, f: impl Fn(S) -> S) -> Self {
        for v in &mut self.table {
            *v = f(*v);
        }
        self
    }

    /// Value at an assignment given as `(var, state)` lookups.
    pub fn value(&self, state_of: impl Fn(usize) -> usize) -> S {
        let idx = self
            .vars
            .iter()
            .zip(&self.cards)
            .fold(0, |acc, (&v, &c)| acc * c + state_of(v));
        self.table[idx]
    }

    /// Slice at `var = state`, dropping `var` from the scope.
    pub fn reduce(&self, var: usize, state: usize) -> Self {
        let Some(pos) = self.vars.iter().position(|&v| v == var) else {
            return self.clone();
        };
        let mut vars = self.vars.clone();
        let mut cards = self.cards.clone();
        vars.remove(pos);
        cards.remove(pos);
        let mut table = Vec::with_capacity(cards.iter().product());
        let mut odo = Odometer::new(&self.cards);
        for &value in &self.table {
            if odo.digits[pos] == state {
                table.push(value);
            }
            odo.advance();
        }
        Factor { vars, cards, table }
    }

    /// Pointwise product (or sum, for log-space tables) over the union scope.
    fn combine(&self, other: &Self, op: impl Fn(S, S) -> S) -> Self {
        let mut vars = self.vars.clone();
        let mut cards = self.cards.clone();
        for (&v, &c) in other.vars.iter().zip(&other.cards) {
            if !vars.contains(&v) {
                vars.push(v);
                cards.push(c);
            }
        }
        let self_strides = strides(&self.cards);
        let other_strides = strides(&other.cards);
        // Stride of each result variable inside each operand (0 when absent).
        let project = |scope: &[usize], st: &[usize]| -> Vec<usize> {
            vars.iter()
                .map(|v| scope.iter().position(|x| x == v).map_or(0, |p| st[p]))
                .collect()
        };
        let a_st = project(&self.vars, &self_strides);
        let b_st = project(&other.vars, &other_strides);
        let size: usize = cards.iter().product();
        let mut table = Vec::with_capacity(size);
        let mut odo = Odometer::new(&cards);
        for _ in 0..size {
            let (mut ia, mut ib) = (0, 0);
            for (d, &digit) in odo.digits.iter().enumerate() {
                ia += digit * a_st[d];
                ib += digit * b_st[d];
            }
            table.push(op(self.table[ia], other.table[ib]));
            odo.advance();
        }
        Factor { vars, cards, table }
    }

    pub fn product(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a * b)
    }

    pub fn log_product(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a + b)
    }

    fn without(&self, var: usize) -> (usize, Vec<usize>, Vec<usize>) {
        let pos = self
            .vars
            .iter()
            .position(|&v| v == var)
            .expect("variable in scope");
        let mut vars = self.vars.clone();
        let mut cards = self.cards.clone();
        vars.remove(pos);
        cards.remove(pos);
        (pos, vars, cards)
    }

    /// Index of each source entry in the table with `pos` removed.
    fn target_indices(&self, pos: usize) -> Vec<usize> {
        let reduced: Vec<usize> = self
            .cards
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != pos)
            .map(|(_, &c)| c)
            .collect();
        let st = strides(&reduced);
        let mut out = Vec::with_capacity(self.table.len());
        let mut odo = Odometer::new(&self.cards);
        for _ in 0..self.table.len() {
            let mut j = 0;
            let mut k = 0;
            for (d, &digit) in odo.digits.iter().enumerate() {
                if d != pos {
                    j += digit * st[k];
                    k += 1;
                }
            }
            out.push(j);
            odo.advance();
        }
        out
    }

    pub fn sum_out(&self, var: usize) -> Self {
        let (pos, vars, cards) = self.without(var);
        let mut table = vec![S::zero(); cards.iter().product()];
        for (value, j) in self.table.iter().zip(self.target_indices(pos)) {
            table[j] = table[j] + *value;
        }
        Factor { vars, cards, table }
    }

    /// Maximizes `var` out. Returns the reduced factor and, per reduced
    /// entry, the state of `var` attaining the maximum: the lowest state
    /// within `tolerance` of it.
    pub fn max_out(&self, var: usize, tolerance: S) -> (Self, Vec<usize>) {
        let (pos, vars, cards) = self.without(var);
        let size: usize = cards.iter().product();
        let targets = self.target_indices(pos);
        let mut table = vec![S::neg_infinity(); size];
        for (value, &j) in self.table.iter().zip(&targets) {
            if *value > table[j] {
                table[j] = *value;
            }
        }
        let mut argmax = vec![usize::MAX; size];
        let mut odo = Odometer::new(&self.cards);
        for (value, &j) in self.table.iter().zip(&targets) {
            let state = odo.digits[pos];
            if argmax[j] == usize::MAX {
                let best = table[j];
                let slack = tolerance * S::one().max(best.abs());
                if best == S::neg_infinity() || *value >= best - slack {
                    argmax[j] = state;
                }
            }
            odo.advance();
        }
        (Factor { vars, cards, table }, argmax)
    }

    /// Divides by the largest entry; returns it (zero tables are left alone).
    pub fn rescale(&mut self) -> S {
        let max = self.table.iter().fold(S::zero(), |m, &v| m.max(v));
        if max > S::zero() {
            for v in &mut self.table {
                *v = *v / max;
            }
        }
        max
    }

    /// Index into `argmax`-style tables aligned with this factor's scope.
    pub fn flat_index(vars: &[usize], cards: &[usize], state_of: impl Fn(usize) -> usize) -> usize {
        vars.iter()
            .zip(cards)
            .fold(0, |acc, (&v, &c)| acc * c + state_of(v))
    }

    pub fn cards(&self) -> &[usize] {
        &self.cards
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_and_marginals() {
        // f(a, b) * g(b, c)
        let f = Factor::<f64>::new(vec![0, 1], vec![2, 2], vec![0.1, 0.2, 0.3, 0.4]);
        let g = Factor::new(vec![1, 2], vec![2, 3], vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let h = f.product(&g);
        assert_eq!(h.vars(), &[0, 1, 2]);
        // a=1, b=0, c=2 -> 0.3 * 3.0
        assert!((h.value(|v| [1, 0, 2][v]) - 0.9).abs() < 1e-15);
        let m = h.sum_out(1);
        assert_eq!(m.vars(), &[0, 2]);
        // a=0, c=1 -> 0.1*2 + 0.2*5
        assert!((m.value(|v| [0, 0, 1][v]) - 1.2).abs() < 1e-15);
    }

    #[test]
    fn reduce_drops_variable() {
        let f = Factor::new(vec![3, 5], vec![2, 3], vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let r = f.reduce(5, 1);
        assert_eq!(r.vars(), &[3]);
        assert_eq!(r.table(), &[2.0, 5.0]);
        let r = f.reduce(3, 1);
        assert_eq!(r.table(), &[4.0, 5.0, 6.0]);
    }

    #[test]
    fn max_out_prefers_lowest_state_on_ties() {
        let f = Factor::new(vec![0, 1], vec![2, 3], vec![0.5, 0.5, 0.1, 0.2, 0.7, 0.7]);
        let (m, arg) = f.max_out(1, 1e-12);
        assert_eq!(m.table(), &[0.5, 0.7]);
        assert_eq!(arg, vec![0, 1]);
        let (m, arg) = f.max_out(0, 1e-12);
        assert_eq!(m.table(), &[0.5, 0.7, 0.7]);
        assert_eq!(arg, vec![0, 1, 1]);
    }
}
