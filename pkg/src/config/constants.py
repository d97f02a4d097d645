EXIT_OK = 0
EXIT_ASSERTION_FAILURE = 1
EXIT_CONFIG_ERROR = 2
EXIT_DIVERGENCE = 3

COMMAND_VERIFY_BACKGROUND = 'verify-background'
COMMAND_FOLIATE = 'foliate'
COMMAND_PENROSE = 'penrose'
COMMAND_MATCH_CHECK = 'match-check'

REPORT_FILE = 'report.json'
LEAVES_FILE = 'leaves.csv'
CHECKS_FILE = 'checks.txt'
LOG_FILE = 'foliation.log'

LEAF_COLUMNS = ['t', 's_base', 'H_const', 'area', 'm_H', 'stability_eig', 'lapse_min', 's_inner', 's_outer',
                'sup_w', 'int_ds_tan_sq', 'int_ring_A_sq', 'lemma_residual', 'min_R_plus_6']
