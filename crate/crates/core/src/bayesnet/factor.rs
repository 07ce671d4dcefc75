//! Dense factors over discrete variables, stored row-major with the last
//! scope variable varying fastest.

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Factor {
    pub scope: Vec<usize>,
    pub cards: Vec<usize>,
    pub values: Vec<f64>,
}

impl Factor {
    pub fn scalar(value: f64) -> Self {
        Factor {
            scope: Vec::new(),
            cards: Vec::new(),
            values: vec![value],
        }
    }

    fn strides(cards: &[usize]) -> Vec<usize> {
        let mut strides = vec![0; cards.len()];
        let mut acc = 1;
        for i in (0..cards.len()).rev() {
            strides[i] = acc;
            acc *= cards[i];
        }
        strides
    }

    /// Fixes `var` to `state`, dropping it from the scope.
    pub fn restrict(&self, var: usize, state: usize) -> Factor {
        let Some(pos) = self.scope.iter().position(|&v| v == var) else {
            return self.clone();
        };
        let strides = Self::strides(&self.cards);
        let scope: Vec<usize> = self.scope.iter().copied().filter(|&v| v != var).collect();
        let cards: Vec<usize> = self
            .cards
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != pos)
            .map(|(_, &c)| c)
            .collect();
        let size: usize = cards.iter().product();
        let mut values = Vec::with_capacity(size);
        let mut assignment = vec![0; cards.len()];
        for _ in 0..size {
            let mut idx = state * strides[pos];
            let mut k = 0;
            for (i, &stride) in strides.iter().enumerate() {
                if i == pos {
                    continue;
                }
                idx += assignment[k] * stride;
                k += 1;
            }
            values.push(self.values[idx]);
            advance(&mut assignment, &cards);
        }
        Factor { scope, cards, values }
    }

    pub fn product(&self, other: &Factor) -> Factor {
        let mut scope = self.scope.clone();
        let mut cards = self.cards.clone();
        for (&v, &c) in other.scope.iter().zip(&other.cards) {
            if !scope.contains(&v) {
                scope.push(v);
                cards.push(c);
            }
        }
        let map = |f: &Factor| -> Vec<usize> {
            let strides = Self::strides(&f.cards);
            scope
                .iter()
                .map(|v| f.scope.iter().position(|w| w == v).map_or(0, |p| strides[p]))
                .collect()
        };
        let sa = map(self);
        let sb = map(other);
        let size: usize = cards.iter().product();
        let mut values = Vec::with_capacity(size);
        let mut assignment = vec![0; cards.len()];
        let (mut ia, mut ib) = (0usize, 0usize);
        for _ in 0..size {
            values.push(self.values[ia] * other.values[ib]);
            // odometer step with incremental index updates
            for i in (0..cards.len()).rev() {
                assignment[i] += 1;
                ia += sa[i];
                ib += sb[i];
                if assignment[i] < cards[i] {
                    break;
                }
                ia -= sa[i] * cards[i];
                ib -= sb[i] * cards[i];
                assignment[i] = 0;
            }
        }
        Factor { scope, cards, values }
    }

    pub fn sum_out(&self, var: usize) -> Factor {
        let Some(pos) = self.scope.iter().position(|&v| v == var) else {
            return self.clone();
        };
        let mut out_scope = self.scope.clone();
        let mut out_cards = self.cards.clone();
        out_scope.remove(pos);
        out_cards.remove(pos);
        let out_strides = Self::strides(&out_cards);
        let mut values = vec![0.0; out_cards.iter().product()];
        let mut assignment = vec![0; self.cards.len()];
        for &v in &self.values {
            let mut idx = 0;
            let mut k = 0;
            for (i, &a) in assignment.iter().enumerate() {
                if i == pos {
                    continue;
                }
                idx += a * out_strides[k];
                k += 1;
            }
            values[idx] += v;
            advance(&mut assignment, &self.cards);
        }
        Factor {
            scope: out_scope,
            cards: out_cards,
            values,
        }
    }
}

fn advance(assignment: &mut [usize], cards: &[usize]) {
    for i in (0..cards.len()).rev() {
        assignment[i] += 1;
        if assignment[i] < cards[i] {
            return;
        }
        assignment[i] = 0;
    }
}
