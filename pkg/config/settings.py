"""
Configurações do laboratório de soluções antigas em faixas.

Every key accepted by the experiment file appears in exactly one of the
section dictionaries below; the file parser rejects anything else.
"""

# Configurações da aplicação
APP_CONFIG = {
    'name': 'Strip Lab',
    'version': '1.0',
    'log_file': 'strip_lab_debug.log',
    'log_format': '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
}

# Seção domain.*: faixa R x (0, L_1) x ... x (0, L_n)
DOMAIN_CONFIG = {
    'n': 1,
    'lengths': [1.0],
    'X': 4.0,
}

# Seção operator.*: coeficientes do operador em forma divergente.
# Limites negativos significam "usar o valor declarado pelo preset".
OPERATOR_CONFIG = {
    'preset': 'laplacian',
    'lambda_ell': -1.0,
    'Lambda_ell': -1.0,
    'eps': -1.0,
    'scheme': 'implicit_euler',
}

# Seção grid.*: malha espaço-tempo do solver FD
GRID_CONFIG = {
    'h0': 0.0625,
    'h': 0.03125,
    'tau': 0.0625,
    'T': 9.0,
}

# Seção experiment.*: parâmetros específicos de cada subcomando
EXPERIMENT_CONFIG = {
    'mu_max': 100.0,
    'd': 6.0,
    'k': 3,
    'N': 6,
    'ell': 1,
    'delta': 1.0 / 6.0,
    'sigma': 0.0,
    'm0': 1,
    'M': 0,
    'r': 1.0,
    'R': 2.0,
    'radii': [1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
    'alpha': 4.0,
    'k_index': 1,
    'source': 'closed',
    'method': 'closed_form',
    'K': 20,
    'seed': 20240607,
    'center': [0.0, 0.0, 0.5],
    'quad_cells': [2048, 512, 32],
    'mv_cells': [64, 200],
    'deltas': [1.0, 0.5, 0.25],
}

# Seção output.*
OUTPUT_CONFIG = {
    'dir': 'reports',
    'formats': ['json', 'csv'],
}

CONFIG_SECTIONS = {
    'domain': DOMAIN_CONFIG,
    'operator': OPERATOR_CONFIG,
    'grid': GRID_CONFIG,
    'experiment': EXPERIMENT_CONFIG,
    'output': OUTPUT_CONFIG,
}

# Tolerâncias numéricas
TOLERANCES = {
    'symmetry_rel': 1e-14,
    'psd_rel': 1e-10,
    'rank_rel': 1e-10,
    'spd_rel': 1e-12,
    'solver_residual_rel': 1e-12,
    'monotone_abs': 1e-12,
    'basis_residual': 1e-8,
    'diagonalize_residual': 1e-10,
    'kernel_rel': 1e-10,
    'min_pivot_ratio': 1e-6,
    'energy_slack_rel': 1e-2,
    'min_cells_across': 16,
    'cutoff_min_cells': 4,
    'certificate_ratio': 10.0,
    'certificate_scan': 100000,
    'growth_rate_rel': 1e-3,
    'spectrum_rel': 1e-12,
}

# Constante da desigualdade do valor médio, calibrada na família do núcleo do calor
C_MV = 1.0

# Presets de coeficientes (n = 1). Each entry names its coefficient family and
# the bounds it is advertised to satisfy.
OPERATOR_PRESETS = {
    'laplacian': {'lambda_ell': 1.0, 'Lambda_ell': 1.0, 'eps': 0.0},
    'modulated': {'lambda_ell': 0.9, 'Lambda_ell': 1.1, 'eps': 0.0},
    'sheared': {'lambda_ell': 0.85, 'Lambda_ell': 1.1, 'eps': 0.01},
}

# 26 direções de {-1, 0, 1}^3 usadas no quociente de Rayleigh
RAYLEIGH_DIRECTIONS = [
    (i, j, k)
    for i in (-1, 0, 1)
    for j in (-1, 0, 1)
    for k in (-1, 0, 1)
    if (i, j, k) != (0, 0, 0)
]
