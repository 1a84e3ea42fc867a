use serde::Serialize;

/// Energy budget terms at one time node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LedgerRow {
    pub t: f64,
    /// `‖u‖²_H`.
    pub kinetic: f64,
    /// `μ‖u‖²_V`.
    pub viscous: f64,
    /// `α‖u‖²_H`.
    pub darcy: f64,
    /// `β‖u‖^{r+1}_{L^{r+1}}`.
    pub forchheimer: f64,
    /// `⟨f, u⟩`.
    pub work_f: f64,
    /// `⟨DU, u⟩`.
    #[serde(rename = "work_DU")]
    pub work_du: f64,
    /// Running energy-equality defect, normalized by `‖u_0‖² + 1`.
    pub equality_residual: f64,
}

/// Per-step energy budget of a forward run together with the a-priori
/// constant `K_T`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyLedger {
    pub rows: Vec<LedgerRow>,
    pub k_t: f64,
    #[serde(skip)]
    defect: f64,
}

impl EnergyLedger {
    pub(crate) fn new() -> Self {
        Self {
            rows: Vec::new(),
            k_t: 0.0,
            defect: 0.0,
        }
    }

    /// Appends a node and updates the running residual by the trapezoid rule.
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn record(
        &mut self,
        t: f64,
        kinetic: f64,
        viscous: f64,
        darcy: f64,
        forchheimer: f64,
        work_f: f64,
        work_du: f64,
    ) {
        let mut row = LedgerRow {
            t,
            kinetic,
            viscous,
            darcy,
            forchheimer,
            work_f,
            work_du,
            equality_residual: 0.0,
        };
        if let (Some(first), Some(prev)) = (self.rows.first(), self.rows.last()) {
            let d = |r: &LedgerRow| r.viscous + r.darcy + r.forchheimer - r.work_f - r.work_du;
            self.defect += (row.t - prev.t) * (d(prev) + d(&row));
            row.equality_residual = (row.kinetic + self.defect - first.kinetic) / (first.kinetic + 1.0);
        }
        self.rows.push(row);
    }

    /// `max_n [‖u_n‖² + μ∫‖u‖²_V + 2α∫‖u‖² + 2β∫‖u‖^{r+1}]`.
    pub fn apriori_left_side(&self) -> f64 {
        let mut best = f64::NEG_INFINITY;
        let mut acc = 0.0;
        for (i, row) in self.rows.iter().enumerate() {
            if i > 0 {
                let p = &self.rows[i - 1];
                let b = |r: &LedgerRow| r.viscous + 2.0 * r.darcy + 2.0 * r.forchheimer;
                acc += 0.5 * (row.t - p.t) * (b(p) + b(row));
            }
            best = best.max(row.kinetic + acc);
        }
        best
    }

    pub fn final_residual(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.equality_residual.abs())
    }
}
