# Bilocal tomography toolkit
