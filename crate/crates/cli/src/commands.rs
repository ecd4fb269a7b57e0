use heis_tube::steiner::{det_b_first_derivative, det_b_second_derivative, series3, NormalJacobian};
use heis_tube::surface::{lambda_from_commutator, nabla_e_nuh_check};
use heis_tube::tolerances::{DET_B_TAYLOR, MC_SIGMAS, UMBILIC_VS_DET};
use heis_tube::{
    cc_geodesic, frame_at, mc_tube_volume, project_to_surface, reach_estimate, singular_set_scan, tube_volume_h1,
    tube_volume_hn, tube_volume_umbilic, umbilic_check, Error, FrameVector, GeodesicArc, LevelSurface, McOptions,
    Patch, Point, ProjectionOptions, ProjectionResult, Reach, ReachOptions, SeedGrid, SurfaceQuadrature, TubeResult,
    EPS_SING,
};
use serde_json::{json, Value};

use crate::config::{Command, Method, RunConfig};
use crate::output::{coord_columns, nums, Cell, Report, Table};
use crate::CliError;

const NABLA_E_TOL: f64 = 1e-6;
const COMMUTATOR_TOL: f64 = 1e-10;
const H1_VS_HN_TOL: f64 = 1e-10;

pub fn run(cfg: &RunConfig) -> Result<Report, CliError> {
    match cfg.command {
        Command::Distance => distance(cfg),
        Command::Geodesic => geodesic(cfg),
        Command::Project => project(cfg),
        Command::Tube => tube(cfg),
        Command::Series => series(cfg),
        Command::Reach => reach(cfg),
        Command::Verify => verify(cfg),
        Command::SingularScan => singular_scan(cfg),
    }
}

fn point(c: &Option<Vec<f64>>) -> Result<Point, CliError> {
    let c = c.as_deref().ok_or_else(|| CliError::usage("missing point"))?;
    Ok(Point::from_coords(c)?)
}

fn distance(cfg: &RunConfig) -> Result<Report, CliError> {
    let (p, q) = (point(&cfg.p)?, point(&cfg.q)?);
    let arc = cc_geodesic(&p, &q);
    let mut table = Table::new(["distance", "curvature"]);
    table.columns.extend(coord_columns("dir_", cfg.n, false));
    let mut row = vec![Cell::Num(arc.length), Cell::Num(arc.curvature)];
    row.extend(nums(&arc.dir.h));
    table.push(row);
    Ok(Report {
        json: json!({ "distance": arc.length, "curvature": arc.curvature, "dir": arc.dir.h.to_vec() }),
        table,
    })
}

fn geodesic(cfg: &RunConfig) -> Result<Report, CliError> {
    let p = point(&cfg.p)?;
    let dir = FrameVector::horizontal(cfg.dir.as_deref().unwrap_or_default());
    let curvature = cfg.curvature.unwrap_or(0.0);
    let mut table = Table::new(["length"]);
    table.columns.extend(coord_columns("", cfg.n, true));
    table.columns.extend(coord_columns("v_", cfg.n, false));
    let mut points = Vec::new();
    for &s in cfg.lengths.as_deref().unwrap_or_default() {
        let arc = GeodesicArc::new(p.clone(), dir.clone(), curvature, s)?;
        let (end, v) = (arc.endpoint(), arc.tangent());
        let mut row = vec![Cell::Num(s)];
        row.extend(nums(&end.coords()));
        row.extend(nums(&v.h));
        table.push(row);
        points.push(json!({ "length": s, "point": end.coords(), "tangent": v.h.to_vec() }));
    }
    Ok(Report {
        json: json!({ "curvature": curvature, "points": points }),
        table,
    })
}

fn foot_table(n: usize, feet: &[ProjectionResult]) -> Report {
    let mut table = Table::new(coord_columns("", n, true));
    table.columns.extend(["distance".to_string(), "curvature".to_string()]);
    table.columns.extend(coord_columns("dir_", n, false));
    let mut items = Vec::new();
    for f in feet {
        let mut row = nums(&f.foot.coords());
        row.extend([Cell::Num(f.dist), Cell::Num(f.arc.curvature)]);
        row.extend(nums(&f.arc.dir.h));
        table.push(row);
        items.push(json!({
            "foot": f.foot.coords(),
            "distance": f.dist,
            "curvature": f.arc.curvature,
            "dir": f.arc.dir.h.to_vec(),
        }));
    }
    Report {
        json: json!({ "feet": items }),
        table,
    }
}

fn project(cfg: &RunConfig) -> Result<Report, CliError> {
    let surface = cfg.surface()?;
    let p = point(&cfg.p)?;
    let seeds = SeedGrid::new(&surface, cfg.patch()?, cfg.grid.unwrap_or(24))?;
    match project_to_surface(&surface, &p, &seeds, &ProjectionOptions::default()) {
        Ok(r) => Ok(foot_table(cfg.n, &[r])),
        Err(Error::AmbiguousProjection { solutions }) => {
            let report = foot_table(cfg.n, &solutions);
            let mut err = CliError::from(Error::AmbiguousProjection { solutions });
            err.details = Some(Box::new(json!({ "solutions": report.json["feet"].clone() })));
            err.report = Some(Box::new(report));
            Err(err)
        }
        Err(e) => Err(e.into()),
    }
}

fn tube_quadrature(
    surface: &LevelSurface,
    patch: &Patch,
    quad: SurfaceQuadrature,
    radii: &[f64],
    method: Method,
) -> Result<TubeResult, Error> {
    match method {
        Method::H1Closed => tube_volume_h1(surface, patch, quad, radii),
        Method::Umbilic => tube_volume_umbilic(surface, patch, quad, radii),
        Method::HnDet | Method::Montecarlo => tube_volume_hn(surface, patch, quad, radii),
    }
}

fn series_json(c: &[f64; 3], order: Option<f64>) -> Value {
    json!({ "c": c.to_vec(), "remainder_order": order })
}

fn tube(cfg: &RunConfig) -> Result<Report, CliError> {
    let surface = cfg.surface()?;
    let patch = cfg.patch()?;
    let radii = cfg.radii()?;
    let quad = cfg.quadrature();
    let method = cfg.method.unwrap_or(Method::HnDet);
    let mut table = Table::new(["r", "volume", "std_error", "series3"]);
    if method == Method::Montecarlo {
        let c = series3(&surface, patch, quad)?;
        let opts = McOptions {
            samples: cfg.samples.unwrap_or_default(),
            seed: cfg.seed.unwrap_or_default(),
            ..Default::default()
        };
        let mut estimates = Vec::new();
        for &r in radii {
            let est = mc_tube_volume(&surface, patch, r, &opts)?;
            let cubic = r * (c[0] + r * (c[1] + r * c[2]));
            table.push(vec![
                Cell::Num(r),
                Cell::Num(est.value),
                Cell::Num(est.std_error),
                Cell::Num(cubic),
            ]);
            estimates.push(est);
        }
        let json = json!({
            "method": "montecarlo",
            "radii": radii,
            "volumes": estimates.iter().map(|e| e.value).collect::<Vec<_>>(),
            "std_errors": estimates.iter().map(|e| e.std_error).collect::<Vec<_>>(),
            "accepted": estimates.iter().map(|e| e.accepted).collect::<Vec<_>>(),
            "diagnostics": estimates.iter().map(|e| e.diagnostics).collect::<Vec<_>>(),
            "series3": series_json(&c, None),
        });
        return Ok(Report { json, table });
    }
    let res = tube_quadrature(&surface, patch, quad, radii, method)?;
    for (r, v) in res.radii.iter().zip(&res.volumes) {
        table.push(vec![
            Cell::Num(*r),
            Cell::Num(*v),
            Cell::Empty,
            Cell::Num(res.series3.eval(*r)),
        ]);
    }
    let json = json!({
        "method": res.method.as_str(),
        "radii": res.radii,
        "volumes": res.volumes,
        "series3": series_json(&res.series3.c, res.series3.remainder_order),
    });
    Ok(Report { json, table })
}

fn series(cfg: &RunConfig) -> Result<Report, CliError> {
    let surface = cfg.surface()?;
    let method = if cfg.n == 1 { Method::H1Closed } else { Method::HnDet };
    let res = tube_quadrature(&surface, cfg.patch()?, cfg.quadrature(), cfg.radii()?, method)?;
    let s = res.series3;
    let remainders: Vec<f64> = res
        .radii
        .iter()
        .zip(&res.volumes)
        .map(|(r, v)| v - s.eval(*r))
        .collect();
    let mut table = Table::new(["c1", "c2", "c3", "remainder_order"]);
    table.push(vec![
        Cell::Num(s.c[0]),
        Cell::Num(s.c[1]),
        Cell::Num(s.c[2]),
        s.remainder_order.map_or(Cell::Empty, Cell::Num),
    ]);
    let json = json!({
        "c": s.c.to_vec(),
        "remainder_order": s.remainder_order,
        "radii": res.radii,
        "volumes": res.volumes,
        "remainders": remainders,
    });
    Ok(Report { json, table })
}

/// Regular lattice points of the patch.
fn lattice_points(surface: &LevelSurface, patch: &Patch, grid: usize) -> (Vec<Point>, usize) {
    let mut skipped = 0;
    let pts = patch
        .lattice(grid)
        .into_iter()
        .filter_map(|u| {
            let q = patch
                .point(surface, &u)
                .ok()
                .filter(|q| surface.horizontal_normal(q).is_ok());
            skipped += usize::from(q.is_none());
            q
        })
        .collect();
    (pts, skipped)
}

fn reach(cfg: &RunConfig) -> Result<Report, CliError> {
    let surface = cfg.surface()?;
    let (points, skipped) = lattice_points(&surface, cfg.patch()?, cfg.grid.unwrap_or(8));
    if points.is_empty() {
        return Err(CliError::from(Error::NoConvergence(
            "no regular lattice points in the patch".into(),
        )));
    }
    let reach = reach_estimate(&surface, &points, &ReachOptions::default())?;
    let mut table = Table::new(["reach", "points", "skipped"]);
    table.push(vec![
        Cell::Num(reach.value()),
        Cell::Int(points.len() as u64),
        Cell::Int(skipped as u64),
    ]);
    let value = match reach {
        Reach::Bounded(v) => json!(v),
        Reach::Unbounded => json!("unbounded"),
    };
    Ok(Report {
        json: json!({ "reach": value, "points": points.len(), "skipped": skipped }),
        table,
    })
}

fn singular_scan(cfg: &RunConfig) -> Result<Report, CliError> {
    let surface = cfg.surface()?;
    let found = singular_set_scan(&surface, cfg.patch()?, cfg.grid.unwrap_or(64), cfg.eps.unwrap_or(1e-8))?;
    let mut table = Table::new(coord_columns("", cfg.n, true));
    for q in &found {
        table.push(nums(&q.coords()));
    }
    let coords: Vec<Vec<f64>> = found.iter().map(Point::coords).collect();
    Ok(Report {
        json: json!({ "count": found.len(), "points": coords }),
        table,
    })
}

struct Check {
    name: &'static str,
    value: f64,
    tolerance: f64,
}

impl Check {
    fn pass(&self) -> bool {
        self.value <= self.tolerance
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Relative error, absolute below `floor` (the exact value may vanish).
fn rel_floor(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / b.abs().max(floor)
}

fn verify(cfg: &RunConfig) -> Result<Report, CliError> {
    let surface = cfg.surface()?;
    let patch = cfg.patch()?;
    let radii = cfg.radii()?;
    let quad = cfg.quadrature();
    let (points, skipped) = lattice_points(&surface, patch, cfg.grid.unwrap_or(3));
    if points.is_empty() {
        return Err(CliError::from(Error::NoConvergence(
            "no regular lattice points in the patch".into(),
        )));
    }

    let (mut nabla, mut d1, mut d2, mut comm) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for q in &points {
        nabla = nabla.max(nabla_e_nuh_check(&surface, q)?);
        let f = frame_at(&surface, q, EPS_SING)?;
        let jac = NormalJacobian::new(&f);
        let h = 1e-3;
        let (p, z, m) = (jac.det(h), jac.det(0.0), jac.det(-h));
        d1 = d1.max(rel_floor((p - m) / (2.0 * h), det_b_first_derivative(&f), 1e-6));
        d2 = d2.max(rel_floor(
            (p - 2.0 * z + m) / (h * h),
            det_b_second_derivative(&f),
            1e-6,
        ));
        if cfg.n == 1 {
            comm = comm.max((lambda_from_commutator(&surface, q)? - f.lambda).abs() / (1.0 + f.lambda.abs()));
        }
    }
    let mut checks = vec![
        Check {
            name: "nabla_e_nuh",
            value: nabla,
            tolerance: NABLA_E_TOL,
        },
        Check {
            name: "det_b_first_derivative",
            value: d1,
            tolerance: DET_B_TAYLOR,
        },
        Check {
            name: "det_b_second_derivative",
            value: d2,
            tolerance: DET_B_TAYLOR,
        },
    ];
    if cfg.n == 1 {
        checks.push(Check {
            name: "lambda_commutator",
            value: comm,
            tolerance: COMMUTATOR_TOL,
        });
    }

    let hn = tube_volume_hn(&surface, patch, quad, radii)?;
    let max_rel = |other: &TubeResult| {
        other
            .volumes
            .iter()
            .zip(&hn.volumes)
            .map(|(a, b)| rel(*a, *b))
            .fold(0.0, f64::max)
    };
    if cfg.n == 1 {
        let h1 = tube_volume_h1(&surface, patch, quad, radii)?;
        checks.push(Check {
            name: "h1_closed_vs_hn_det",
            value: max_rel(&h1),
            tolerance: H1_VS_HN_TOL,
        });
    } else if points
        .iter()
        .all(|q| umbilic_check(&surface, q, heis_tube::steiner::UMBILIC_TOL).is_ok_and(|r| r.is_umbilic))
    {
        match tube_volume_umbilic(&surface, patch, quad, radii) {
            Ok(u) => checks.push(Check {
                name: "umbilic_vs_hn_det",
                value: max_rel(&u),
                tolerance: UMBILIC_VS_DET,
            }),
            Err(Error::NotUmbilic { .. }) => {}
            Err(e) => return Err(e.into()),
        }
    }
    if let Some(samples) = cfg.samples {
        let r = radii[radii.len() - 1];
        let est = mc_tube_volume(
            &surface,
            patch,
            r,
            &McOptions {
                samples,
                seed: cfg.seed.unwrap_or_default(),
                ..Default::default()
            },
        )?;
        let quad_value = hn.volumes[radii.len() - 1];
        let z = (est.value - quad_value).abs() / est.std_error.max(f64::MIN_POSITIVE);
        checks.push(Check {
            name: "montecarlo_sigmas",
            value: z,
            tolerance: MC_SIGMAS,
        });
    }

    let mut table = Table::new(["check", "value", "tolerance", "pass"]);
    let mut items = Vec::new();
    for c in &checks {
        table.push(vec![
            Cell::Text(c.name.into()),
            Cell::Num(c.value),
            Cell::Num(c.tolerance),
            Cell::Text(c.pass().to_string()),
        ]);
        items.push(json!({ "check": c.name, "value": c.value, "tolerance": c.tolerance, "pass": c.pass() }));
    }
    let failed: Vec<&str> = checks.iter().filter(|c| !c.pass()).map(|c| c.name).collect();
    let report = Report {
        json: json!({ "checks": items, "points": points.len(), "skipped": skipped }),
        table,
    };
    if failed.is_empty() {
        return Ok(report);
    }
    let mut err = CliError::domain("VerificationFailed", format!("failed checks: {}", failed.join(", ")));
    err.report = Some(Box::new(report));
    Err(err)
}
