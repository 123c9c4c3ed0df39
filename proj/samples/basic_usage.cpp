// Generates a small synthetic dataset, harvests clusters and prints a summary.

#include <cstdio>

#include "ich/ich.hpp"

int main() {
    const auto data = ich::generate_dataset({{"Center", 30}, {"Donut", 30}, {"Near-Full", 30}}, 48, 1);

    ich::HarvestConfig cfg;
    cfg.n_pca = 10;
    cfg.n_c = 8;
    cfg.full_assign = true;
    const auto outcome = ich::run_ich(data, cfg);

    for (const auto& rec : outcome.state.log)
        std::printf("iter %zu: %zu remaining, harvested %zu (s_max %.3f, mostly %s)\n", rec.iteration, rec.remaining,
                    rec.chosen_size, rec.s_max, rec.majority_label->c_str());

    const auto partial = ich::partial_assignment(outcome.state);
    std::printf("%zu clusters; partial homogeneity %.3f over %zu maps\n", outcome.n_clusters(),
                ich::homogeneity_of(*data.labels(), partial.members(), partial.cluster_of()), partial.size());
    return 0;
}
