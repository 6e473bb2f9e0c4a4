use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::capacity::{channel_capacity, distance_metric, mismatch_link};
use super::device::DeviceProfile;
use super::head::elect_head;
use crate::error::{Error, Result};
use crate::rng;

/// A group of devices with an elected head.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub id: String,
    /// Member ids in ascending order.
    pub members: Vec<String>,
    pub head: Option<String>,
    pub head_score: Option<f64>,
}

/// Point in the joint feature space: position plus link parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Centroid {
    pub position: [f64; 2],
    pub link: [f64; 3],
}

impl Centroid {
    fn of(d: &DeviceProfile) -> Self {
        Self {
            position: d.position,
            link: d.link_pauli,
        }
    }

    fn mean<'a>(devices: impl Iterator<Item = &'a DeviceProfile>) -> Option<Self> {
        let mut acc = [0.0; 5];
        let mut n = 0usize;
        for d in devices {
            for (a, v) in acc.iter_mut().zip(d.position.iter().chain(&d.link_pauli)) {
                *a += v;
            }
            n += 1;
        }
        (n > 0).then(|| {
            let m = acc.map(|a| a / n as f64);
            Self {
                position: [m[0], m[1]],
                link: [m[2], m[3], m[4]],
            }
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClusteringParams {
    /// Weight of the spatial term in the distance.
    pub alpha: f64,
    /// Weight of channel capacity against classical resources in head election.
    pub lambda: f64,
    pub max_iter: usize,
    /// Independent seeded runs in [`cluster_fleet`]; the lowest final
    /// objective wins.
    pub restarts: usize,
}

impl Default for ClusteringParams {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            lambda: 0.5,
            max_iter: 100,
            restarts: 10,
        }
    }
}

/// Outcome of a k-means run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KMeansResult {
    pub clusters: Vec<Cluster>,
    pub centroids: Vec<Centroid>,
    /// Objective after each assignment/update pass.
    pub objective: Vec<f64>,
    pub iterations: usize,
}

/// Largest pairwise device distance, or 1 for a single point.
pub fn fleet_diameter(devices: &[DeviceProfile]) -> f64 {
    let mut d_max: f64 = 0.0;
    for (i, a) in devices.iter().enumerate() {
        for b in &devices[i + 1..] {
            d_max = d_max.max(euclid(a.position, b.position));
        }
    }
    if d_max > 0.0 {
        d_max
    } else {
        1.0
    }
}

fn euclid(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Distance between a device and a centroid.
pub fn device_distance(d: &DeviceProfile, c: &Centroid, alpha: f64, d_max: f64) -> f64 {
    let ce = channel_capacity(mismatch_link(d.link_pauli, c.link)).unwrap_or(0.0);
    distance_metric(euclid(d.position, c.position), ce, alpha, d_max)
}

fn cost(devices: &[DeviceProfile], members: &[usize], c: &Centroid, alpha: f64, d_max: f64) -> f64 {
    members
        .iter()
        .map(|&i| device_distance(&devices[i], c, alpha, d_max))
        .sum()
}

/// Seeded k-means over the fleet. Initial centroids are distinct devices;
/// each pass assigns devices to the nearest centroid (ties to the lower
/// index) and moves each centroid to its members' mean when that does not
/// raise the cluster's cost. Clusters are named `C1..Cn` in order of their
/// smallest member id; heads are left unset.
pub fn kmeans_cluster(
    devices: &[DeviceProfile],
    n_clusters: usize,
    seed: u64,
    params: &ClusteringParams,
) -> Result<KMeansResult> {
    if n_clusters == 0 || n_clusters > devices.len() {
        return Err(Error::InvalidParameter(format!(
            "cannot form {n_clusters} clusters from {} devices",
            devices.len()
        )));
    }
    let alpha = params.alpha;
    let d_max = fleet_diameter(devices);
    let mut order: Vec<usize> = (0..devices.len()).collect();
    order.sort_by(|&a, &b| devices[a].id.cmp(&devices[b].id));
    order.shuffle(&mut rng::rng(seed));
    let mut centroids: Vec<Centroid> = order[..n_clusters]
        .iter()
        .map(|&i| Centroid::of(&devices[i]))
        .collect();

    let mut objective = Vec::new();
    let mut assignment = vec![0usize; devices.len()];
    let mut iterations = 0;
    loop {
        iterations += 1;
        for (i, d) in devices.iter().enumerate() {
            assignment[i] = centroids
                .iter()
                .enumerate()
                .map(|(k, c)| (k, device_distance(d, c, alpha, d_max)))
                .fold(
                    (0, f64::INFINITY),
                    |best, (k, v)| if v < best.1 { (k, v) } else { best },
                )
                .0;
        }
        repair_empty(devices, &mut assignment, &mut centroids, alpha, d_max);

        let mut moved = false;
        for (k, c) in centroids.iter_mut().enumerate() {
            let members: Vec<usize> = (0..devices.len()).filter(|&i| assignment[i] == k).collect();
            if let Some(mean) = Centroid::mean(members.iter().map(|&i| &devices[i])) {
                if mean != *c
                    && cost(devices, &members, &mean, alpha, d_max)
                        <= cost(devices, &members, c, alpha, d_max)
                {
                    *c = mean;
                    moved = true;
                }
            }
        }
        objective.push(
            devices
                .iter()
                .zip(&assignment)
                .map(|(d, &k)| device_distance(d, &centroids[k], alpha, d_max))
                .sum(),
        );
        if !moved || iterations >= params.max_iter {
            break;
        }
    }

    let mut groups: Vec<(Vec<String>, Centroid)> = (0..n_clusters)
        .map(|k| {
            let mut ids: Vec<String> = devices
                .iter()
                .zip(&assignment)
                .filter(|(_, &a)| a == k)
                .map(|(d, _)| d.id.clone())
                .collect();
            ids.sort();
            (ids, centroids[k])
        })
        .collect();
    groups.sort_by(|a, b| a.0.first().cmp(&b.0.first()));
    let (clusters, centroids) = groups
        .into_iter()
        .enumerate()
        .map(|(k, (members, c))| {
            (
                Cluster {
                    id: format!("C{}", k + 1),
                    members,
                    head: None,
                    head_score: None,
                },
                c,
            )
        })
        .unzip();
    Ok(KMeansResult {
        clusters,
        centroids,
        objective,
        iterations,
    })
}

/// Gives every empty cluster the device farthest from its own centroid
/// (taken from a cluster with at least two members), centred on that device.
fn repair_empty(
    devices: &[DeviceProfile],
    assignment: &mut [usize],
    centroids: &mut [Centroid],
    alpha: f64,
    d_max: f64,
) {
    for k in 0..centroids.len() {
        if assignment.contains(&k) {
            continue;
        }
        let donor = (0..devices.len())
            .filter(|&i| assignment.iter().filter(|&&a| a == assignment[i]).count() > 1)
            .map(|i| {
                (
                    i,
                    device_distance(&devices[i], &centroids[assignment[i]], alpha, d_max),
                )
            })
            .fold(None::<(usize, f64)>, |best, (i, v)| match best {
                Some((_, b)) if b >= v => best,
                _ => Some((i, v)),
            });
        if let Some((i, _)) = donor {
            assignment[i] = k;
            centroids[k] = Centroid::of(&devices[i]);
        }
    }
}

/// Best of `params.restarts` k-means runs (seeds derived from `seed`, ties
/// to the earlier run), with a head elected for each cluster.
pub fn cluster_fleet(
    devices: &[DeviceProfile],
    n_clusters: usize,
    seed: u64,
    params: &ClusteringParams,
) -> Result<Vec<Cluster>> {
    let mut best: Option<KMeansResult> = None;
    for r in 0..params.restarts.max(1) {
        let run = kmeans_cluster(devices, n_clusters, rng::derive(seed, &[r as u64]), params)?;
        let score = |k: &KMeansResult| k.objective.last().copied().unwrap_or(f64::INFINITY);
        if best.as_ref().is_none_or(|b| score(&run) < score(b)) {
            best = Some(run);
        }
    }
    let mut result = best.expect("at least one run").clusters;
    assign_heads(&mut result, devices, params.lambda)?;
    Ok(result)
}

/// Builds clusters from explicit member lists and elects heads.
pub fn fixed_clusters(
    devices: &[DeviceProfile],
    groups: &[Vec<String>],
    lambda: f64,
) -> Result<Vec<Cluster>> {
    let mut clusters = groups
        .iter()
        .enumerate()
        .map(|(k, g)| {
            let mut members = g.clone();
            members.sort();
            for id in &members {
                super::device::find_device(devices, id)?;
            }
            Ok(Cluster {
                id: format!("C{}", k + 1),
                members,
                head: None,
                head_score: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    assign_heads(&mut clusters, devices, lambda)?;
    Ok(clusters)
}

fn assign_heads(clusters: &mut [Cluster], devices: &[DeviceProfile], lambda: f64) -> Result<()> {
    for c in clusters.iter_mut() {
        let members: Vec<&DeviceProfile> = c
            .members
            .iter()
            .map(|id| super::device::find_device(devices, id))
            .collect::<Result<_>>()?;
        let (head, score) = elect_head(&members, devices, lambda)?;
        c.head = Some(head);
        c.head_score = Some(score);
    }
    Ok(())
}
