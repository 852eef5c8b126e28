// optimize_genus(n = 8, N = 7, quadratic), κ = 0.99999: genus 2.6540159581917937,
// T' = 0.13683574612723565, C_K = 0.03431344777799121.
const N8_T: f64 = 0.13924559741771375;
const N8_R: [f64; 3] = [0.021486862813937274, 0.004276862377415008, 0.004566027868486865];
const N8_VARRHO: [f64; 3] = [1.0, 0.19381577843630068, 0.24483838777204467];
const N8_RHO: f64 = 1.342308671096351;
