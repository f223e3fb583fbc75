from django.contrib import admin
from spdtransport.models import Run


class RunAdmin(admin.ModelAdmin):
    list_display = ('command', 'status', 'exit_code', 'seed', 'started',
                    'run_dir')
    list_filter = ('command', 'status')
    search_fields = ('run_dir', 'config_hash')

admin.site.register(Run, RunAdmin)
