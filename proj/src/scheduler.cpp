#include "tetopt/scheduler.hpp"

#include <algorithm>
#include <functional>
#include <memory>
#include <thread>

#include "tetopt/errors.hpp"
#include "tetopt/gsc.hpp"
#include "tetopt/local_ops.hpp"
#include "tetopt/moore.hpp"

namespace tetopt {
namespace {

Eigen::AlignedBox3d mesh_bbox(const Mesh& mesh) {
  Eigen::AlignedBox3d box;
  for (const auto& v : mesh.vertices) box.extend(v.position);
  return box;
}

using AttemptFn = std::function<OpStatus(Mesh&, TetId, OpContext*)>;

// One seed of the smoothing/edge-removal phase: try each vertex, then each
// edge, stopping at the first success.
OpStatus attempt_ser(Mesh& mesh, TetId seed, OpContext* ctx) {
  const std::array<VertexId, 4> verts = mesh.tets[seed].v;
  bool suspended = false;

  for (VertexId v : verts) {
    if (mesh.vertices[v].on_boundary) continue;
    switch (smooth_vertex(mesh, v, seed, ctx)) {
      case OpStatus::Applied:
        return OpStatus::Applied;
      case OpStatus::Suspended:
        suspended = true;
        break;
      case OpStatus::Rejected:
        break;
    }
  }

  constexpr int kEdge[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
  for (const auto& e : kEdge) {
    switch (edge_removal(mesh, verts[e[0]], verts[e[1]], seed, ctx)) {
      case OpStatus::Applied:
        return OpStatus::Applied;
      case OpStatus::Suspended:
        suspended = true;
        break;
      case OpStatus::Rejected:
        break;
    }
  }
  return suspended ? OpStatus::Suspended : OpStatus::Rejected;
}

struct WorkerOutcome {
  std::size_t attempted = 0;
  std::size_t applied = 0;
  std::vector<TetId> suspended;
};

// Tet slots each applied operation may need; generous, checked at runtime.
std::size_t slack_per_op(SweepPhase phase) {
  return phase == SweepPhase::Gsc ? 192 : 16;
}

std::size_t run_cascade(Mesh& mesh, std::vector<TetId> pending, SweepPhase phase,
                        int& workers, const ImproveOptions& opts,
                        const AttemptFn& attempt, std::vector<SweepStats>& log) {
  std::size_t applied_total = 0;

  while (!pending.empty()) {
    std::sort(pending.begin(), pending.end());
    SweepStats stats;
    stats.phase = phase;
    stats.workers = workers;
    std::vector<TetId> next;

    if (workers <= 1) {
      for (TetId seed : pending) {
        if (mesh.tets[seed].deleted) continue;
        stats.attempted++;
        if (attempt(mesh, seed, nullptr) == OpStatus::Applied) stats.applied++;
      }
    } else {
      PartitionAssignment assign = make_partitions(mesh, pending, workers, opts.moore_order);

      // per-worker slot arenas, preallocated so the tet table never grows
      // while workers are running
      const TetId base = static_cast<TetId>(mesh.tets.size());
      std::vector<SlotRange> arenas(workers);
      TetId cursor = base;
      for (int w = 0; w < workers; w++) {
        const std::size_t slots = slack_per_op(phase) * assign.owned_bad[w].size() + 64;
        arenas[w] = {cursor, static_cast<TetId>(cursor + slots)};
        cursor = arenas[w].end;
      }
      mesh.tets.resize(cursor);

      std::vector<WorkerOutcome> outcomes(workers);
      std::vector<std::thread> pool;
      pool.reserve(workers);
      for (int w = 0; w < workers; w++) {
        pool.emplace_back([&, w] {
          OpContext ctx;
          ctx.arena = &arenas[w];
          ctx.owner = {&assign.owner_of, w, arenas[w].next, arenas[w].end};
          WorkerOutcome& out = outcomes[w];
          for (TetId seed : assign.owned_bad[w]) {
            if (mesh.tets[seed].deleted) continue;
            out.attempted++;
            switch (attempt(mesh, seed, &ctx)) {
              case OpStatus::Applied:
                out.applied++;
                break;
              case OpStatus::Suspended:
                out.suspended.push_back(seed);
                break;
              case OpStatus::Rejected:
                break;
            }
          }
        });
      }
      for (auto& t : pool) t.join();

      for (const WorkerOutcome& out : outcomes) {
        stats.attempted += out.attempted;
        stats.applied += out.applied;
        stats.suspended += out.suspended.size();
        next.insert(next.end(), out.suspended.begin(), out.suspended.end());
      }
      // ambiguous tets never reached a worker; retry them like suspensions
      stats.attempted += assign.suspended_pool.size();
      stats.suspended += assign.suspended_pool.size();
      next.insert(next.end(), assign.suspended_pool.begin(), assign.suspended_pool.end());
    }

    stats.rho = stats.attempted > 0 ? double(stats.suspended) / double(stats.attempted) : 0.0;
    applied_total += stats.applied;
    log.push_back(stats);

    workers = std::max(
        1, std::min(opts.max_workers,
                    static_cast<int>(double(workers) * (1.0 - stats.rho)) +
                        (stats.rho < 1.0 ? 1 : 0)));
    pending = std::move(next);
  }
  return applied_total;
}

void maybe_compact(Mesh& mesh) {
  const std::size_t live = mesh.live_tets();
  if (mesh.tets.size() > live + live / 2 + 1024) compact(mesh);
}

}  // namespace

PartitionAssignment make_partitions(Mesh& mesh, std::span<const TetId> bad_tets, int k,
                                    int order) {
  k = std::max(1, k);
  const Eigen::AlignedBox3d box = mesh_bbox(mesh);
  for (auto& v : mesh.vertices) v.moore_index = moore_index(v.position, box, order);

  const std::uint64_t total = 1ull << (3 * order);

  std::vector<std::uint64_t> reps;
  reps.reserve(bad_tets.size());
  for (TetId t : bad_tets) {
    std::array<std::uint64_t, 4> m;
    for (int i = 0; i < 4; i++) m[i] = mesh.vertices[mesh.tets[t].v[i]].moore_index;
    std::sort(m.begin(), m.end());
    reps.push_back(m[1]);
  }
  std::vector<std::uint64_t> sorted_reps = reps;
  std::sort(sorted_reps.begin(), sorted_reps.end());

  PartitionAssignment out;
  std::vector<std::uint64_t> cuts(k + 1, 0);
  cuts[k] = total;
  for (int c = 1; c < k; c++) {
    if (sorted_reps.empty())
      cuts[c] = total / k * c;
    else
      cuts[c] = sorted_reps[std::size_t(c) * sorted_reps.size() / k];
    cuts[c] = std::max(cuts[c], cuts[c - 1]);
  }

  out.partitions.resize(k);
  for (int p = 0; p < k; p++)
    out.partitions[p] = {cuts[p], cuts[p + 1], 0, p};

  auto partition_of = [&](std::uint64_t m) {
    const int p = static_cast<int>(
        std::upper_bound(cuts.begin(), cuts.end(), m) - cuts.begin() - 1);
    return std::min(p, k - 1);
  };

  // a tet belongs to a partition iff >= 3 of its 4 vertices do; since the
  // ranges are contiguous, the two middle indices must share the partition
  out.owner_of.assign(mesh.tets.size(), -1);
  for (TetId t = 0; t < mesh.tets.size(); t++) {
    if (mesh.tets[t].deleted) continue;
    std::array<std::uint64_t, 4> m;
    for (int i = 0; i < 4; i++) m[i] = mesh.vertices[mesh.tets[t].v[i]].moore_index;
    std::sort(m.begin(), m.end());
    const int p1 = partition_of(m[1]);
    if (p1 != partition_of(m[2])) continue;
    if (partition_of(m[0]) == p1 || partition_of(m[3]) == p1) out.owner_of[t] = p1;
  }

  out.owned_bad.resize(k);
  for (std::size_t i = 0; i < bad_tets.size(); i++) {
    const TetId t = bad_tets[i];
    const std::int32_t owner = out.owner_of[t];
    if (owner >= 0) {
      out.owned_bad[owner].push_back(t);
      out.partitions[owner].owned_bad_tets++;
    } else {
      out.suspended_pool.push_back(t);
    }
  }
  return out;
}

ImproveResult improve(Mesh& mesh, const ImproveOptions& options) {
  ImproveResult result;
  result.bad_before = get_bad_tetrahedra(mesh, options.q_min).size();

  const int max_workers = std::max(1, options.max_workers);
  std::vector<std::unique_ptr<SprEngine>> engines(max_workers);
  for (int w = 0; w < max_workers; w++) engines[w] = std::make_unique<SprEngine>();

  GscOptions gsc_options;
  gsc_options.spr_node_budget = options.spr_node_budget;

  const AttemptFn ser_attempt = [](Mesh& m, TetId seed, OpContext* ctx) {
    return attempt_ser(m, seed, ctx);
  };
  const AttemptFn gsc_attempt = [&](Mesh& m, TetId seed, OpContext* ctx) {
    const int w = (ctx != nullptr) ? ctx->owner.self : 0;
    return gsc(m, seed, *engines[w], gsc_options, ctx, nullptr);
  };

  int workers = max_workers;
  std::size_t gsc_modifications = 0;
  do {
    std::size_t ser_modifications = 0;
    do {
      std::vector<TetId> bad = get_bad_tetrahedra(mesh, options.q_min);
      ser_modifications =
          run_cascade(mesh, std::move(bad), SweepPhase::Ser, workers, options,
                      ser_attempt, result.sweeps);
      result.applied_total += ser_modifications;
      maybe_compact(mesh);
    } while (ser_modifications > 0);

    std::vector<TetId> bad = get_bad_tetrahedra(mesh, options.q_min);
    gsc_modifications = run_cascade(mesh, std::move(bad), SweepPhase::Gsc, workers,
                                    options, gsc_attempt, result.sweeps);
    result.applied_total += gsc_modifications;
    maybe_compact(mesh);
  } while (gsc_modifications > 0);

  result.bad_after = get_bad_tetrahedra(mesh, options.q_min).size();
  if (options.reproducible) reproducible_reorder(mesh);
  return result;
}

void reproducible_reorder(Mesh& mesh) {
  compact(mesh);

  std::vector<std::array<VertexId, 4>> keys(mesh.tets.size());
  for (TetId t = 0; t < mesh.tets.size(); t++) {
    keys[t] = mesh.tets[t].v;
    std::sort(keys[t].begin(), keys[t].end());
  }
  std::vector<TetId> order(mesh.tets.size());
  for (TetId t = 0; t < mesh.tets.size(); t++) order[t] = t;
  std::sort(order.begin(), order.end(),
            [&](TetId a, TetId b) { return keys[a] < keys[b]; });

  std::vector<TetId> new_slot(mesh.tets.size());
  for (TetId i = 0; i < order.size(); i++) new_slot[order[i]] = i;

  std::vector<Tetrahedron> sorted(mesh.tets.size());
  for (TetId t = 0; t < mesh.tets.size(); t++) {
    Tetrahedron tet = mesh.tets[t];
    for (auto& n : tet.neighbor)
      if (n != kNoTet) n = new_slot[n];
    sorted[new_slot[t]] = tet;
  }
  mesh.tets = std::move(sorted);
}

}  // namespace tetopt
